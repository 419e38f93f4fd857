//! Extending an operator to a Brownian unitary on a larger space and checking
//! the roundtrip:
//!
//! - a restriction recovers exactly the block it was cut from;
//! - a unitary extends by adjoining a fresh canonical summand;
//! - a block whose `V, E` ranges miss basis directions gets a new summand
//!   coupled onto the gap, and the completed operator certifies.

use covlab::certify::brownian_certificate;
use covlab::families::{brownian_extension, canonical_brownian};
use covlab::operator::{Operator, Subspace};
use std::sync::Arc;

fn main() {
    let sigma = 2.0f64.sqrt();

    // Roundtrip: restrict then extend gives back the original block. The
    // restriction acts on plain labels e_i; `embed` places e_i back into the
    // big space, and compressing R's action through it recovers T exactly.
    let full = canonical_brownian(sigma).unwrap();
    let t = Operator::restrict(&full, &Subspace::h1_plus_even_h2(), 64).unwrap();
    let (embed, r) = brownian_extension(&t, sigma).unwrap();
    for i in 0..16usize {
        let via_t = t.forward(&t.label_at(i));
        let via_r = r
            .forward(&embed.label_at(i))
            .filter_map_labels(|m| embed.index_of(m).map(|p| t.label_at(p)));
        assert!(via_t.minus(&via_r).norm() <= 1e-12);
    }
    let cert = brownian_certificate(&r, sigma, 64, 1e-9).unwrap();
    assert!(cert.verdict.overall);
    println!("restriction roundtrip: extension reproduces the original block, certificate PASS");

    // A plain unitary extends by direct sum with the canonical block.
    let u = Operator::diagonal_unitary(Arc::new(|n| {
        let th = 0.2 * n as f64;
        covlab::basis::Scalar::new(th.cos(), th.sin())
    }));
    let (embed, r) = brownian_extension(&u, sigma).unwrap();
    let cert = brownian_certificate(&r, sigma, 64, 1e-9).unwrap();
    println!(
        "unitary extension:     certificate {} at sigma = {sigma:.4}",
        if cert.verdict.overall { "PASS" } else { "FAIL" }
    );
    assert!(cert.verdict.overall);
    // The embedded copy acts like U itself.
    for i in 0..8 {
        let l = u.label_at(i);
        let got = r.forward(&embed.label_at(i));
        let want = u.forward(&l).map_labels(|m| m.prefixed("1"));
        assert!(got.minus(&want).norm() <= 1e-12);
    }

    // A block with a range gap: V, E both land in even positions, leaving the
    // odd first-component directions uncovered. The extension adjoins a third
    // summand coupled onto that gap.
    let v = Operator::injection(Arc::new(|k| 4 * k), Arc::new(|m| (m % 4 == 0).then(|| m / 4)));
    let e = Operator::injection(
        Arc::new(|k| 4 * k + 2),
        Arc::new(|m| (m % 4 == 2).then(|| (m - 2) / 4)),
    );
    let gappy = Operator::block_upper(&v, &e, &Operator::identity(), sigma);
    let cert = brownian_certificate(&gappy, sigma, 64, 1e-9).unwrap();
    println!(
        "gappy block alone:     certificate {} (ran V + ran E misses directions)",
        if cert.verdict.overall { "PASS" } else { "FAIL" }
    );
    assert!(!cert.verdict.overall);

    let (_, r) = brownian_extension(&gappy, sigma).unwrap();
    let cert = brownian_certificate(&r, sigma, 64, 1e-9).unwrap();
    println!(
        "gap-completed block:   certificate {}",
        if cert.verdict.overall { "PASS" } else { "FAIL" }
    );
    assert!(cert.verdict.overall);
}
