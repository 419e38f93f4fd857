//! Blocks `[V σ_n E; 0 U]` with σ_n → 0 converge in norm to the isometry
//! `V ⊕ U`, which is *not* unitary — so the norm limit of Brownian-type
//! operators need not be one (the class is closed only under adding
//! unitaries).

use std::sync::Arc;

use covlab::basis::{BasisLabel, SparseVector};
use covlab::certify::brownian_certificate;
use covlab::families::sslnv_family;

fn main() {
    let f = sslnv_family(Arc::new(|n| 1.0 / n as f64)).unwrap();

    println!("  n    sup-deviation on basis vectors   1/n");
    for n in [1u32, 2, 4, 8, 16] {
        let m = (f.member)(n);
        let mut worst = 0.0f64;
        for k in 0..32u128 {
            for l in [BasisLabel::plain(k).prefixed("1"), BasisLabel::plain(k).prefixed("2")] {
                worst = worst.max(m.forward(&l).minus(&f.limit.forward(&l)).norm());
            }
        }
        println!("  {n:<4} {worst:<32.12} {}", 1.0 / n as f64);
        assert!((worst - 1.0 / n as f64).abs() <= 1e-12);
    }

    // Each member is Brownian of covariance 1/n...
    let cert = brownian_certificate(&(f.member)(3), 1.0 / 3.0, 64, 1e-9).unwrap();
    println!("\nmember(3) at sigma = 1/3: {}", if cert.verdict.overall { "PASS" } else { "FAIL" });
    assert!(cert.verdict.overall);

    // ...but the limit fails the unitary claim with co-isometry defect 1.
    let cert = brownian_certificate(&f.limit, 0.0, 64, 1e-9).unwrap();
    println!(
        "limit at sigma = 0:       {} (co-isometry defect {})",
        if cert.verdict.overall { "PASS" } else { "FAIL" },
        cert.residuals.unitary.unwrap()
    );
    assert!(!cert.verdict.overall);

    // The defect lives exactly on the odd first-component directions missed
    // by ran V ⊕ ran U.
    let l = BasisLabel::plain(1).prefixed("1");
    let codefect = f
        .limit
        .apply(&f.limit.adjoint_forward(&l))
        .minus(&SparseVector::basis(l.clone()));
    println!("(T T* - I) at {l}: norm {}", codefect.norm());
}
