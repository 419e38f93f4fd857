//! Restrictions and compressions behave very differently:
//!
//! - restricting to an invariant subspace keeps the 2-isometry identity but
//!   can destroy condition (iv) — the restriction of a Brownian unitary need
//!   not be one at any covariance;
//! - restricting to a non-invariant subspace is rejected outright;
//! - compressing (no invariance required) can break even the 2-isometry.

use covlab::certify::{brownian_certificate, two_isometry_residual};
use covlab::families::canonical_brownian;
use covlab::operator::{Operator, Subspace};

fn main() {
    let sigma = 2.0f64.sqrt();
    let t = canonical_brownian(sigma).unwrap();

    // H1 plus the even-index part of H2 is invariant; the restriction stays a
    // 2-isometry but fails the quadratic constraint (iv).
    let s = Subspace::h1_plus_even_h2();
    let r = Operator::restrict(&t, &s, 64).unwrap();
    let cert = brownian_certificate(&r, sigma, 64, 1e-9).unwrap();
    println!(
        "restriction to invariant subspace: (i) residual {:.2e}, (iv) defect {:.4}",
        cert.residuals.i,
        cert.residuals.iv.unwrap()
    );
    assert!(cert.verdict.i && !cert.verdict.iv.unwrap());

    // A finite-dimensional slice is not invariant under the shift.
    match Operator::restrict(&Operator::shift(), &Subspace::first_indices(4), 64) {
        Err(e) => println!("restricting the shift to 4 labels: rejected ({e})"),
        Ok(_) => unreachable!("non-invariant restriction must fail"),
    }

    // Compression of a cyclic unitary to a corner: unitarity and the
    // 2-isometry identity are both lost.
    let c = Operator::cyclic(6);
    println!(
        "\ncyclic(6):              2-isometry residual {:.2e}",
        two_isometry_residual(&c, 16)
    );
    let p = Operator::compress(&c, &Subspace::first_indices(4));
    println!(
        "compressed to 4 labels: 2-isometry residual {:.2e}",
        two_isometry_residual(&p, 16)
    );
    assert!(two_isometry_residual(&p, 16) > 0.5);
}
