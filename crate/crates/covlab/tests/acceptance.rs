//! Acceptance gate: one test per shipped guarantee, each printing a PASS line
//! (run with `--nocapture` to see them). Tolerances are the shipped defaults.

use std::process::Command;
use std::sync::Arc;

use covlab::basis::{inner, BasisLabel, SparseVector};
use covlab::certify::{brownian_certificate, covariance_bounds, norm_bound, two_isometry_residual};
use covlab::converge::{covariance_track, default_probes, deviation_profile, Mode};
use covlab::families::{
    bishop_approximant, canonical_brownian, canonical_family, clidr_two_isometry, js01_shift,
    power_envelope, prz1_family, przew2_family, shift_tail_block, sslnv_family, CovClaim,
};
use covlab::operator::{Operator, Subspace};

fn pass(k: u32, msg: &str) {
    println!("ACCEPTANCE {k}: PASS - {msg}");
}

#[test]
fn criterion_01_two_isometry_identity() {
    for lambda in [2.0f64.sqrt(), 1.5, 3.0] {
        let r = two_isometry_residual(&js01_shift(lambda).unwrap(), 64);
        assert!(r <= 1e-10, "js01({lambda}): residual {r}");
    }
    for q in [0.25, 0.5, 0.9] {
        let r = two_isometry_residual(&clidr_two_isometry(q).unwrap(), 64);
        assert!(r <= 1e-10, "clidr({q}): residual {r}");
    }
    for sigma in [0.5, 1.0, 2.0] {
        let r = two_isometry_residual(&canonical_brownian(sigma).unwrap(), 64);
        assert!(r <= 1e-10, "canonical({sigma}): residual {r}");
    }
    pass(1, "2-isometry residual <= 1e-10 at depth 64 across all nine parameter points");
}

#[test]
fn criterion_02_certificate_positive_cases() {
    let cert = brownian_certificate(&canonical_brownian(2.0).unwrap(), 2.0, 64, 1e-9).unwrap();
    assert!(cert.verdict.overall, "canonical(2): {:?}", cert);

    let fams = [
        prz1_family(2.0, None, None).unwrap(),
        przew2_family(2.0f64.sqrt()).unwrap(),
        sslnv_family(Arc::new(|n| 1.0 / n as f64)).unwrap(),
    ];
    for f in &fams {
        for n in 1..=8u32 {
            let sigma = f.claimed_member_cov.at(n);
            let cert = brownian_certificate(&(f.member)(n), sigma, 64, 1e-9).unwrap();
            assert!(cert.verdict.overall, "{} member {n} at sigma {sigma}: {:?}", f.name, cert);
        }
    }
    pass(2, "canonical(2) and all prz1/przew2/sslnv members (n <= 8) certify at claimed sigma");
}

#[test]
fn criterion_03_certificate_negative_cases() {
    // js01(sqrt 2) claimed at sigma = 1: the defect is not a projection.
    let cert = brownian_certificate(&js01_shift(2.0f64.sqrt()).unwrap(), 1.0, 8, 1e-9).unwrap();
    assert!(!cert.verdict.overall);
    assert!(!cert.verdict.iii.unwrap());
    let d3 = cert.residuals.iii.unwrap();
    assert!(d3 >= 0.24, "condition (iii) defect {d3}");
    assert!((d3 - 0.25).abs() <= 1e-12, "expected exactly 1/4, got {d3}");

    // Block with a non-unitary isometry in the U-slot: condition (ii) fails.
    let s2 = 2.0f64.sqrt();
    let cert = brownian_certificate(&shift_tail_block(s2).unwrap(), s2, 64, 1e-9).unwrap();
    assert!(!cert.verdict.ii.unwrap(), "{:?}", cert);

    // Restriction of a Brownian block to an invariant subspace that cuts the
    // E-range: conditions (i)-(iii) survive, (iv) fails at a gap vector.
    let full = canonical_brownian(s2).unwrap();
    let t = Operator::restrict(&full, &Subspace::h1_plus_even_h2(), 64).unwrap();
    let cert = brownian_certificate(&t, s2, 64, 1e-9).unwrap();
    assert!(cert.verdict.i && cert.verdict.ii.unwrap() && cert.verdict.iii.unwrap());
    assert!(!cert.verdict.iv.unwrap());
    assert!(cert.residuals.iv.unwrap() >= 1.0, "iv defect {}", cert.residuals.iv.unwrap());

    // The norm limit V ⊕ U is an isometry but not unitary: claimed sigma 0
    // fails with co-isometry defect exactly 1.
    let f = sslnv_family(Arc::new(|n| 1.0 / n as f64)).unwrap();
    let cert = brownian_certificate(&f.limit, 0.0, 64, 1e-9).unwrap();
    assert!(!cert.verdict.overall);
    let u = cert.residuals.unitary.unwrap();
    assert!((u - 1.0).abs() <= 1e-12, "co-isometry defect {u}");

    pass(3, "all four negative cases fail the expected condition with quantified defects");
}

#[test]
fn criterion_04_power_formulas() {
    let clidr = clidr_two_isometry(0.5).unwrap();
    for n in 1..=16u32 {
        let e2 = power_envelope(&clidr, n).unwrap().e_norm.powi(2);
        let want = 1.0 - 0.5f64.powi(n as i32);
        assert!((e2 - want).abs() <= 1e-10, "clidr n={n}: {e2} vs {want}");
    }
    let can = canonical_brownian(2.0).unwrap();
    for n in 1..=16u32 {
        let e = power_envelope(&can, n).unwrap().e_norm;
        let want = 2.0 * (n as f64).sqrt();
        assert!((e - want).abs() <= 1e-9, "canonical n={n}: {e} vs {want}");
    }
    pass(4, "corner norms match 1-q^n (clidr) and sigma*sqrt(n) (canonical) for n = 1..16");
}

#[test]
fn criterion_05_orthogonal_sum_law() {
    let unitary = Operator::diagonal_unitary(Arc::new(|_| covlab::basis::Scalar::new(1.0, 0.0)));
    let good = Operator::oplus(vec![canonical_brownian(2.0).unwrap(), unitary]);
    let cert = brownian_certificate(&good, 2.0, 64, 1e-9).unwrap();
    assert!(cert.verdict.overall, "{:?}", cert);

    let bad = Operator::oplus(vec![
        canonical_brownian(1.0).unwrap(),
        canonical_brownian(2.0).unwrap(),
    ]);
    let cert = brownian_certificate(&bad, 2.0, 64, 1e-9).unwrap();
    assert!(!cert.verdict.iii.unwrap(), "{:?}", cert);
    let d3 = cert.residuals.iii.unwrap();
    assert!(d3 >= 0.18, "condition (iii) defect {d3}");
    assert!((d3 - 3.0 / 16.0).abs() <= 1e-12, "expected exactly 3/16, got {d3}");
    pass(5, "sum with a unitary certifies at sigma=2; mixed sigmas fail (iii) with defect 3/16");
}

#[test]
fn criterion_06_lower_semicontinuity() {
    let f = prz1_family(2.0, None, None).unwrap();
    let rep = covariance_track(&f, 16, 64);
    for row in &rep.cov_track {
        assert!((row.cov.lower - 2.0).abs() <= 1e-9 && (row.cov.upper - 2.0).abs() <= 1e-9);
    }
    let lim = rep.limit_cov.unwrap();
    assert!(lim.lower <= 1e-12 && lim.upper <= 1e-12);
    assert!(!rep.semicontinuity_flag);

    let f = sslnv_family(Arc::new(|n| 1.0 / n as f64)).unwrap();
    let rep = covariance_track(&f, 16, 64);
    for row in &rep.cov_track {
        let want = 1.0 / row.n as f64;
        assert!((row.cov.lower - want).abs() <= 1e-12);
        assert!((row.cov.upper - want).abs() <= 1e-12);
    }
    assert!(!rep.semicontinuity_flag);
    pass(6, "covariance tracks match analytic values and the semicontinuity flag stays down");
}

#[test]
fn criterion_07_bishop_approximants() {
    let r = canonical_brownian(1.0).unwrap();
    let s = Subspace::h1_plus_even_h2();
    let t = Operator::restrict(&r, &s, 64).unwrap();

    // T_n fixes the span of the first n basis vectors exactly.
    for n in [2u32, 5, 9] {
        let tn = bishop_approximant(&r, &s, &t, n).unwrap();
        for i in 0..n as usize {
            let l = t.label_at(i);
            let d = tn.forward(&l).minus(&t.forward(&l)).norm();
            assert!(d == 0.0, "n={n}, i={i}: deviation {d}");
        }
    }

    // Covariance interval is inherited from R.
    for n in 1..=16u32 {
        let tn = bishop_approximant(&r, &s, &t, n).unwrap();
        let cov = covariance_bounds(&tn, 32);
        assert!((cov.lower - 1.0).abs() <= 1e-12 && (cov.upper - 1.0).abs() <= 1e-12, "n={n}");
    }

    // Strong deviation at the eight basis probes is below 1e-6 by n = 48.
    let tn = bishop_approximant(&r, &s, &t, 48).unwrap();
    for i in 0..8 {
        let v = SparseVector::basis(t.label_at(i));
        let d = tn.apply(&v).minus(&t.apply(&v)).norm();
        assert!(d <= 1e-6, "probe {i}: deviation {d}");
    }
    pass(7, "approximants fix early vectors exactly, inherit cov [1,1], converge by n = 48");
}

#[test]
fn criterion_08_norm_covariance_inequalities() {
    let mut ops: Vec<(String, Operator)> = vec![
        ("js01".into(), js01_shift(2.0f64.sqrt()).unwrap()),
        ("clidr".into(), clidr_two_isometry(0.5).unwrap()),
    ];
    for f in [
        canonical_family(2.0).unwrap(),
        prz1_family(2.0, None, None).unwrap(),
        przew2_family(2.0f64.sqrt()).unwrap(),
        sslnv_family(Arc::new(|n| 1.0 / n as f64)).unwrap(),
    ] {
        for n in 1..=8u32 {
            ops.push((format!("{}[{}]", f.name, n), (f.member)(n)));
        }
    }
    for (name, op) in &ops {
        let cov = covariance_bounds(op, 64);
        let (nlo, nhi) = norm_bound(op, 64);
        assert!(
            nlo <= (1.0 + cov.upper * cov.upper).sqrt() + 1e-9,
            "{name}: norm lower {nlo} vs cov upper {}",
            cov.upper
        );
        assert!(
            cov.lower <= (1.0 + nhi * nhi).sqrt() + 1e-9,
            "{name}: cov lower {} vs norm upper {nhi}",
            cov.lower
        );
    }
    pass(8, "norm and covariance intervals satisfy both inequalities on every shipped operator");
}

#[test]
fn criterion_09_compression_counterexample() {
    let a = Operator::cyclic(3);
    let b = Operator::compress(&a, &Subspace::first_indices(2));
    let bsb = Operator::compose(&b.adjoint(), &b);
    let bbs = Operator::compose(&b, &b.adjoint());
    let comm = Operator::add_scale(
        covlab::basis::Scalar::new(1.0, 0.0),
        &bsb,
        covlab::basis::Scalar::new(-1.0, 0.0),
        &bbs,
    );
    let m = comm.principal_block(2);
    let norm = m.singular_values().iter().copied().fold(0.0, f64::max);
    assert!((norm - 1.0).abs() <= 1e-12, "commutator norm {norm}");
    pass(9, "compressing the 3-cycle to two coordinates gives ||B*B - BB*|| = 1");
}

#[test]
fn criterion_10_weak_stability_contrast() {
    // Powers of the isometric 2-isometry die weakly against the first column.
    let t = clidr_two_isometry(0.5).unwrap();
    let e0 = SparseVector::basis(t.label_at(0));
    let mut p = e0.clone();
    for _ in 0..30 {
        p = t.apply(&p);
    }
    for extra in 0..5 {
        for j in 0..=8 {
            let ej = SparseVector::basis(t.label_at(j));
            let v = inner(&ej, &p).norm();
            assert!(v <= 1e-6, "n={} j={j}: |entry| = {v}", 30 + extra);
        }
        p = t.apply(&p);
    }
    // The Brownian block's corner norm is unbounded in n.
    let e = power_envelope(&canonical_brownian(2.0).unwrap(), 64).unwrap().e_norm;
    assert!(e >= 2.0 * 64f64.sqrt() - 1e-9, "corner norm at n=64: {e}");
    pass(10, "clidr powers vanish weakly by n = 30 while the Brownian corner norm reaches 16");
}

#[test]
fn criterion_11_cli_determinism() {
    let bin = env!("CARGO_BIN_EXE_covlab");
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a.json");
    let out2 = dir.path().join("b.json");
    for (args, o1, o2) in [
        (
            vec!["converge", "--family", "prz1", "--sigma", "2", "--nmax", "24", "--seed", "11"],
            &out1,
            &out2,
        ),
    ] {
        for out in [o1, o2] {
            let status = Command::new(bin)
                .args(&args)
                .arg("--out")
                .arg(out)
                .status()
                .unwrap();
            // 0 or 1 are both valid math outcomes; 2 would be a usage error.
            assert_ne!(status.code(), Some(2), "usage error: {args:?}");
        }
        let a = std::fs::read(o1).unwrap();
        let b = std::fs::read(o2).unwrap();
        assert_eq!(a, b, "outputs differ for {args:?}");
    }
    // Certify reports too.
    let run = |out: &std::path::Path| {
        let status = Command::new(bin)
            .args(["certify", "--family", "canonical", "--param", "sigma=2", "--sigma", "2"])
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    };
    run(&out1);
    run(&out2);
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
    pass(11, "repeated CLI runs with identical config and seed are byte-identical");
}

// Spot-check invariant of the family claims: the declared member covariance
// matches the computed interval at default depth.
#[test]
fn family_claims_are_honest() {
    for f in [
        canonical_family(2.0).unwrap(),
        prz1_family(2.0, None, None).unwrap(),
        przew2_family(1.5).unwrap(),
        sslnv_family(Arc::new(|n| 1.0 / n as f64)).unwrap(),
    ] {
        for n in 1..=16u32 {
            let claimed = match &f.claimed_member_cov {
                CovClaim::Constant(c) => *c,
                CovClaim::PerIndex(g) => g(n),
            };
            let cov = covariance_bounds(&(f.member)(n), 64);
            assert!(
                (cov.lower - claimed).abs() <= 1e-9 && (cov.upper - claimed).abs() <= 1e-9,
                "{} member {n}: claimed {claimed}, got [{}, {}]",
                f.name,
                cov.lower,
                cov.upper
            );
        }
    }
}

// The convergence claims themselves, at the default probe set.
#[test]
fn star_strong_families_reach_threshold() {
    for f in [prz1_family(2.0, None, None).unwrap(), przew2_family(2.0f64.sqrt()).unwrap()] {
        assert_eq!(f.claimed_mode, Mode::StarStrong);
        let probes = default_probes(&f.limit, 7);
        let rep = deviation_profile(&f, Mode::StarStrong, &probes, 64, 7);
        for p in &probes {
            let ok = rep
                .rows
                .iter()
                .filter(|r| r.probe_id == p.id() && r.n >= 32)
                .all(|r| r.deviation <= 1e-6);
            assert!(ok, "{}: probe {} misses the tail threshold", f.name, p.id());
        }
    }
}
