//! Certify the canonical Brownian-type block `[V σE; 0 U]` at its true
//! covariance and print the full certificate JSON.

use covlab::certify::brownian_certificate;
use covlab::families::canonical_brownian;

fn main() {
    let sigma = 2.0;
    let t = canonical_brownian(sigma).unwrap();
    let cert = brownian_certificate(&t, sigma, 64, 1e-9).unwrap();

    println!("{}", serde_json::to_string_pretty(&cert).unwrap());
    println!();
    println!(
        "overall: {}  (residuals i={:.2e}, ii={:.2e}, iii={:.2e}, iv={:.2e})",
        if cert.verdict.overall { "PASS" } else { "FAIL" },
        cert.residuals.i,
        cert.residuals.ii.unwrap(),
        cert.residuals.iii.unwrap(),
        cert.residuals.iv.unwrap(),
    );
    assert!(cert.verdict.overall);
}
