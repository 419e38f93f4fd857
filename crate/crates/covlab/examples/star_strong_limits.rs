//! Two sequences of covariance-σ block operators converging *-strongly to
//! unitaries, with the limit's covariance dropping to zero — covariance is
//! only lower semicontinuous, and the drop is as large as you like.

use std::sync::Arc;

use covlab::converge::{covariance_track, default_probes, deviation_profile, Mode};
use covlab::families::{prz1_family, przew2_family, FamilyHandle};
use covlab::operator::PhaseFn;

fn show(f: &FamilyHandle, n_max: u32) {
    let probes = default_probes(&f.limit, 7);
    let rep = deviation_profile(f, Mode::StarStrong, &probes, n_max, 7);
    println!("family {}  (params {})", f.name, f.params);
    println!("  worst *-strong deviation over {} probes:", probes.len());
    for n in [1, 2, 4, 8, 16, 32].into_iter().filter(|&n| n <= n_max) {
        let worst = rep
            .rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.deviation)
            .fold(0.0f64, f64::max);
        println!("    n = {n:<3} dev = {worst:.3e}");
    }
    let track = covariance_track(f, 8, 64);
    let lim = track.limit_cov.unwrap();
    println!(
        "  member cov = [{:.6}, {:.6}],  limit cov = [{:.6}, {:.6}],  flag = {}",
        track.cov_track[0].cov.lower,
        track.cov_track[0].cov.upper,
        lim.lower,
        lim.upper,
        track.semicontinuity_flag
    );
    println!();
}

fn main() {
    show(&prz1_family(2.0, None, None).unwrap(), 32);
    show(&przew2_family(2.0f64.sqrt()).unwrap(), 32);

    // Arbitrary unimodular data is allowed; the limit is then that diagonal.
    let lambdas: PhaseFn = Arc::new(|j: u128| {
        let th = 0.31 * (j as f64 + 1.0);
        covlab::basis::Scalar::new(th.cos(), th.sin())
    });
    show(&prz1_family(1.0, Some(lambdas), None).unwrap(), 32);
}
