//! Residual certificates: 2-isometry identity, covariance intervals, and the
//! four-condition characterization of Brownian-type block operators.
//!
//! All residuals are suprema of vector norms over an enumerated prefix of the
//! basis. An operator identity `A = 0` holds iff these residuals vanish at
//! every depth, so a finite-depth residual is a falsifiable, monotone test.

use serde::Serialize;

use crate::basis::Scalar;
use crate::operator::{DeltaHint, Operator};
use crate::Error;

pub const DEFAULT_DEPTH: usize = 64;
pub const DEFAULT_TOL: f64 = 1e-9;

/// Two-sided estimate of `cov T = sqrt(||T*T - I||)` at a truncation depth.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CovarianceInterval {
    pub lower: f64,
    pub upper: f64,
    #[serde(skip)]
    pub depth: usize,
}

fn one() -> Scalar {
    Scalar::new(1.0, 0.0)
}

fn re(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}

/// `T*T - I`.
pub fn defect(t: &Operator) -> Operator {
    let tst = Operator::compose(&t.adjoint(), t);
    Operator::add_scale(one(), &tst, -one(), &Operator::identity())
}

/// `TT* - I`.
pub fn codefect(t: &Operator) -> Operator {
    let tts = Operator::compose(t, &t.adjoint());
    Operator::add_scale(one(), &tts, -one(), &Operator::identity())
}

/// Max over the first `depth` labels of `||A e_l||`.
pub fn sup_residual(a: &Operator, space: &Operator, depth: usize) -> f64 {
    (0..depth)
        .map(|i| a.forward(&space.label_at(i)).norm())
        .fold(0.0, f64::max)
}

/// Residual of the 2-isometry identity `I - 2T*T + T*^2 T^2 = 0`.
pub fn two_isometry_residual(t: &Operator, depth: usize) -> f64 {
    assert!(depth >= 1);
    let tst = Operator::compose(&t.adjoint(), t);
    let t2 = Operator::compose(t, t);
    let t2s2 = Operator::compose(&t2.adjoint(), &t2);
    let head = Operator::add_scale(one(), &Operator::identity(), re(-2.0), &tst);
    let iso2 = Operator::add_scale(one(), &head, one(), &t2s2);
    sup_residual(&iso2, t, depth)
}

/// Largest singular value of the depth principal block of `a`, in `space`'s
/// enumeration.
fn principal_norm(a: &Operator, space: &Operator, depth: usize) -> f64 {
    let labels: Vec<_> = (0..depth).map(|i| space.label_at(i)).collect();
    let mut m = nalgebra::DMatrix::<Scalar>::zeros(depth, depth);
    for (j, lj) in labels.iter().enumerate() {
        let col = a.forward(lj);
        for (i, li) in labels.iter().enumerate() {
            m[(i, j)] = col.entry(li);
        }
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Schur bound `||A|| <= sqrt(R * C)` from max absolute row/column sums over
/// the first `depth` columns of `A` and of `A*`.
fn schur_bound(a: &Operator, space: &Operator, depth: usize) -> f64 {
    let col = (0..depth)
        .map(|i| {
            a.forward(&space.label_at(i))
                .iter()
                .map(|(_, amp)| amp.norm())
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let row = (0..depth)
        .map(|i| {
            a.adjoint_forward(&space.label_at(i))
                .iter()
                .map(|(_, amp)| amp.norm())
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    (row * col).sqrt()
}

/// Interval estimate of `cov T`.
///
/// The lower bound is rigorous (largest singular value of a compression of
/// `Δ_T`); the upper bound combines a Schur row/column bound with any
/// builder-declared information. When the builder certifies a diagonal `Δ`
/// with a known sup, both bounds are that analytic value.
pub fn covariance_bounds(t: &Operator, depth: usize) -> CovarianceInterval {
    assert!(depth >= 1);
    if let Some(DeltaHint::DiagonalSup(s)) = t.delta_hint() {
        let c = s.max(0.0).sqrt();
        return CovarianceInterval { lower: c, upper: c, depth };
    }
    let d = defect(t);
    let lower = principal_norm(&d, t, depth).sqrt();
    let mut upper = schur_bound(&d, t, depth).sqrt();
    if let Some(h) = t.norm_hint() {
        // ||Δ|| <= max(||T||^2 - 1, 1) <= h^2 + 1 is crude but always valid.
        upper = upper.min((h * h + 1.0).sqrt());
    }
    CovarianceInterval { lower, upper: upper.max(lower), depth }
}

/// Interval estimate of `||T||`: principal-block singular value from below,
/// Schur and covariance-derived bounds from above.
pub fn norm_bound(t: &Operator, depth: usize) -> (f64, f64) {
    assert!(depth >= 1);
    let lower = principal_norm(t, t, depth);
    let mut upper = schur_bound(t, t, depth);
    let cov = covariance_bounds(t, depth);
    // ||T|| <= sqrt(1 + cov(T)^2).
    upper = upper.min((1.0 + cov.upper * cov.upper).sqrt());
    if let Some(h) = t.norm_hint() {
        upper = upper.min(h);
    }
    (lower, upper.max(lower))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Residuals {
    /// 2-isometry identity.
    pub i: f64,
    /// `Δ (TT* - I) Δ = 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ii: Option<f64>,
    /// Projection defect of `σ^{-2} Δ`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iii: Option<f64>,
    /// `∇^2 = σ^4(σ^2-1)∇`, or `∇ = 0` at σ = 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iv: Option<f64>,
    /// Isometry + co-isometry residual, used when σ = 0.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitary: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Verdict {
    pub i: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ii: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iii: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iv: Option<bool>,
    pub cov: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unitary: Option<bool>,
    pub overall: bool,
}

/// Residual report for the four-condition Brownian-unitary characterization
/// at a claimed covariance `sigma` (σ = 0 claims a unitary).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Certificate {
    pub sigma: f64,
    pub depth: usize,
    pub tol: f64,
    pub residuals: Residuals,
    pub cov: CovarianceInterval,
    pub verdict: Verdict,
}

pub fn brownian_certificate(
    t: &Operator,
    sigma: f64,
    depth: usize,
    tol: f64,
) -> Result<Certificate, Error> {
    if sigma < 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidParameter {
            name: "sigma".into(),
            reason: "must be a finite nonnegative real".into(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol".into(),
            reason: "must be positive".into(),
        });
    }
    if depth < 1 {
        return Err(Error::InvalidParameter {
            name: "depth".into(),
            reason: "must be at least 1".into(),
        });
    }

    let res_i = two_isometry_residual(t, depth);
    let cov = covariance_bounds(t, depth);

    let (residuals, verdict) = if sigma == 0.0 {
        let d = defect(t);
        let cd = codefect(t);
        let unitary = (0..depth)
            .map(|i| {
                let l = t.label_at(i);
                d.forward(&l).norm().max(cd.forward(&l).norm())
            })
            .fold(0.0, f64::max);
        let pass = unitary <= tol;
        (
            Residuals { i: res_i, ii: None, iii: None, iv: None, unitary: Some(unitary) },
            Verdict {
                i: res_i <= tol,
                ii: None,
                iii: None,
                iv: None,
                cov: cov.lower <= tol,
                unitary: Some(pass),
                overall: pass && cov.lower <= tol,
            },
        )
    } else {
        let d = defect(t);
        let cd = codefect(t);
        // (ii): Δ (TT* - I) Δ = 0.
        let op_ii = Operator::compose(&d, &Operator::compose(&cd, &d));
        let res_ii = sup_residual(&op_ii, t, depth);
        // (iii): P = σ^{-2} Δ is an orthogonal projection (P self-adjoint by
        // construction, so only P^2 = P is tested).
        let p = Operator::scaled(re(1.0 / (sigma * sigma)), &d);
        let op_iii = Operator::add_scale(one(), &Operator::compose(&p, &p), -one(), &p);
        let res_iii = sup_residual(&op_iii, t, depth);
        // (iv): ∇ = (σ² - Δ)(TT* - I)(σ² - Δ) with ∇² = σ⁴(σ²-1)∇, which
        // degenerates to ∇ = 0 at σ = 1.
        let s2_minus_d =
            Operator::add_scale(re(sigma * sigma), &Operator::identity(), -one(), &d);
        let nabla =
            Operator::compose(&s2_minus_d, &Operator::compose(&cd, &s2_minus_d));
        let res_iv = if (sigma - 1.0).abs() <= tol {
            sup_residual(&nabla, t, depth)
        } else {
            let c = sigma.powi(4) * (sigma * sigma - 1.0);
            let op_iv = Operator::add_scale(
                one(),
                &Operator::compose(&nabla, &nabla),
                re(-c),
                &nabla,
            );
            sup_residual(&op_iv, t, depth)
        };
        let vi = res_i <= tol;
        let vii = res_ii <= tol;
        let viii = res_iii <= tol;
        let viv = res_iv <= tol;
        let vcov = (cov.lower - sigma).abs() <= tol && cov.upper <= sigma + tol;
        (
            Residuals {
                i: res_i,
                ii: Some(res_ii),
                iii: Some(res_iii),
                iv: Some(res_iv),
                unitary: None,
            },
            Verdict {
                i: vi,
                ii: Some(vii),
                iii: Some(viii),
                iv: Some(viv),
                cov: vcov,
                unitary: None,
                overall: vi && vii && viii && viv && vcov,
            },
        )
    };

    Ok(Certificate { sigma, depth, tol, residuals, cov, verdict })
}
