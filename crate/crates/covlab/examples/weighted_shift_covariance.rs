//! The 2-isometric weighted shift: weights, the diagonal defect operator,
//! and a covariance interval that matches the analytic supremum.

use covlab::basis::BasisLabel;
use covlab::certify::{covariance_bounds, defect, two_isometry_residual};
use covlab::families::js01_shift;

fn main() {
    let lambda = 1.5f64;
    let t = js01_shift(lambda).unwrap();
    let c = lambda * lambda - 1.0;

    println!("lambda = {lambda}, 2-isometry residual at depth 64: {:.2e}", two_isometry_residual(&t, 64));
    println!();
    println!("  n   weight w_n        defect (T*T - I)_nn   analytic (λ²−1)/(1+n(λ²−1))");
    let d = defect(&t);
    for n in 0..8u128 {
        let l = BasisLabel::plain(n);
        let w = t.forward(&l).entry(&BasisLabel::plain(n + 1)).re;
        let dn = d.forward(&l).entry(&l).re;
        let want = c / (1.0 + n as f64 * c);
        println!("  {n}   {w:<16.12}  {dn:<20.12}  {want:.12}");
        assert!((dn - want).abs() <= 1e-12);
    }
    let cov = covariance_bounds(&t, 64);
    println!();
    println!("covariance interval: [{}, {}]  (analytic sqrt(λ²−1) = {})", cov.lower, cov.upper, c.sqrt());
}
