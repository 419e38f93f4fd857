//! Weak stability without strong stability: the powers of the isometric
//! 2-isometry tend to zero weakly (every matrix entry dies) while each power
//! remains an isometry, so `‖T^n f‖ = ‖f‖` never decays.

use covlab::basis::{inner, SparseVector};
use covlab::converge::{deviation_profile, weak_pair_probes, Mode};
use covlab::families::clidr_power_family;

fn main() {
    let f = clidr_power_family(0.5).unwrap();

    // Pair probes <T^n e_0, e_j>: exactly zero once the orbit leaves the
    // window, because T^n e_0 is a combination of basis vectors with
    // ever-larger indices.
    let probes = weak_pair_probes(&f.limit, 5);
    let rep = deviation_profile(&f, Mode::WeakToZero, &probes, 12, 5);
    println!("  n    worst |<T^n f, g>| over {} pair probes", probes.len());
    for n in [1u32, 2, 3, 4, 6, 8, 12] {
        let worst = rep
            .rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.deviation)
            .fold(0.0f64, f64::max);
        println!("  {n:<4} {worst:.3e}");
    }

    // Meanwhile every power preserves norms on the nose.
    let e0 = SparseVector::basis(f.limit.label_at(0));
    println!("\n  n    ‖T^n e_0‖   support size of T^n e_0");
    for n in [1u32, 4, 8, 12] {
        let v = (f.member)(n).apply(&e0);
        println!("  {n:<4} {:<11.9} {}", v.norm(), v.support_len());
        assert!((v.norm() - 1.0).abs() <= 1e-12);
    }

    // The diagonal entry <T^n e_0, e_0> vanishes exactly for n >= 1.
    let d = inner(&e0, &(f.member)(8).apply(&e0));
    println!("\n<T^8 e_0, e_0> = {d}");
}
