//! Three ways to fail the four-condition certificate, each with a quantified
//! defect:
//!
//! 1. the 2-isometric weighted shift claimed at sigma = 1 — its defect
//!    operator is not a projection (condition iii, defect 1/4);
//! 2. a block with a non-unitary isometry in the U-slot (condition ii);
//! 3. an orthogonal sum mixing two different covariances (condition iii,
//!    defect 3/16).

use covlab::certify::brownian_certificate;
use covlab::families::{canonical_brownian, js01_shift, shift_tail_block};
use covlab::operator::Operator;

fn main() {
    let js = js01_shift(2.0f64.sqrt()).unwrap();
    let cert = brownian_certificate(&js, 1.0, 16, 1e-9).unwrap();
    println!(
        "weighted shift at sigma=1:   condition (iii) defect = {:.6}  (exact: 0.25)",
        cert.residuals.iii.unwrap()
    );
    assert!(!cert.verdict.iii.unwrap());

    let s2 = 2.0f64.sqrt();
    let cert = brownian_certificate(&shift_tail_block(s2).unwrap(), s2, 64, 1e-9).unwrap();
    println!(
        "shift in the U-slot:         condition (ii) defect  = {:.6}  (exact: sigma^4 = 4)",
        cert.residuals.ii.unwrap()
    );
    assert!(!cert.verdict.ii.unwrap());

    let mixed = Operator::oplus(vec![
        canonical_brownian(1.0).unwrap(),
        canonical_brownian(2.0).unwrap(),
    ]);
    let cert = brownian_certificate(&mixed, 2.0, 64, 1e-9).unwrap();
    println!(
        "mixed-sigma orthogonal sum:  condition (iii) defect = {:.6}  (exact: 3/16)",
        cert.residuals.iii.unwrap()
    );
    assert!(!cert.verdict.iii.unwrap());
}
