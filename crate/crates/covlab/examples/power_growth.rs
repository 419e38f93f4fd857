//! Growth of the corner block of `T^n` for block 2-isometries: the n-th power
//! of `[V σE; 0 U]` is again block upper-triangular with corner `E_n`, and
//! `‖E_n‖` distinguishes the bounded-power regime (‖E_n‖² = 1 − qⁿ ↑ below 1)
//! from the canonical one (‖E_n‖ = σ√n, unbounded).

use covlab::families::{canonical_brownian, clidr_two_isometry, power_envelope};

fn main() {
    let q = 0.5f64;
    let t = clidr_two_isometry(q).unwrap();
    println!("isometric 2-isometry, q = {q}:");
    println!("  n    ‖E_n‖            sqrt(1 - q^n)");
    for n in [1u32, 2, 4, 8, 16] {
        let env = power_envelope(&t, n).unwrap();
        let want = (1.0 - q.powi(n as i32)).sqrt();
        println!("  {n:<4} {:<16.12} {want:.12}", env.e_norm);
        assert!((env.e_norm - want).abs() <= 1e-9);
    }
    println!("  powers stay uniformly bounded: ‖E_n‖ < 1 for every n\n");

    let sigma = 2.0f64;
    let t = canonical_brownian(sigma).unwrap();
    println!("canonical block, sigma = {sigma}:");
    println!("  n    ‖E_n‖            sigma * sqrt(n)");
    for n in [1u32, 2, 4, 8, 16] {
        let env = power_envelope(&t, n).unwrap();
        let want = sigma * (n as f64).sqrt();
        println!("  {n:<4} {:<16.12} {want:.12}", env.e_norm);
        assert!((env.e_norm - want).abs() <= 1e-9);
    }
    println!("  powers grow without bound, at the square-root rate");
}
