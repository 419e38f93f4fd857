//! Deviation meters for weak / strong / *-strong / norm convergence of an
//! operator sequence, plus covariance tracking along the sequence.

use serde::Serialize;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{inner, Scalar, SparseVector};
use crate::certify::{covariance_bounds, CovarianceInterval};
use crate::families::FamilyHandle;
use crate::operator::Operator;

/// Operator-topology convergence mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Weak,
    Strong,
    StarStrong,
    Norm,
    /// Powers converging weakly to zero (weak stability).
    WeakToZero,
}

impl Mode {
    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "weak" => Some(Mode::Weak),
            "strong" => Some(Mode::Strong),
            "star" | "star_strong" => Some(Mode::StarStrong),
            "norm" => Some(Mode::Norm),
            "weak_to_zero" => Some(Mode::WeakToZero),
            _ => None,
        }
    }
}

/// A test input for a deviation seminorm: a single vector for strong-type
/// modes, a vector pair for weak-type modes.
#[derive(Clone, Debug)]
pub enum Probe {
    Vector { id: String, v: SparseVector },
    Pair { id: String, f: SparseVector, g: SparseVector },
}

impl Probe {
    pub fn id(&self) -> &str {
        match self {
            Probe::Vector { id, .. } => id,
            Probe::Pair { id, .. } => id,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeviationRow {
    pub n: u32,
    pub probe_id: String,
    pub deviation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CovTrackRow {
    pub n: u32,
    pub cov: CovarianceInterval,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub family: String,
    pub params: serde_json::Value,
    pub mode: Mode,
    pub n_max: u32,
    pub seed: u64,
    pub rows: Vec<DeviationRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cov_track: Vec<CovTrackRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_cov: Option<CovarianceInterval>,
    /// Raised when the limit's covariance lower bound exceeds the tail window
    /// of member upper bounds (lower-semicontinuity violation).
    pub semicontinuity_flag: bool,
}

/// Deviation of `member(n)` from the limit at one probe, in the given mode.
pub fn deviation(member: &Operator, limit: &Operator, mode: Mode, probe: &Probe) -> f64 {
    match (mode, probe) {
        (Mode::Strong, Probe::Vector { v, .. }) | (Mode::Norm, Probe::Vector { v, .. }) => {
            member.apply(v).minus(&limit.apply(v)).norm()
        }
        (Mode::StarStrong, Probe::Vector { v, .. }) => {
            let fwd = member.apply(v).minus(&limit.apply(v)).norm();
            let adj = member.apply_adjoint(v).minus(&limit.apply_adjoint(v)).norm();
            fwd + adj
        }
        (Mode::Weak, Probe::Pair { f, g, .. }) | (Mode::WeakToZero, Probe::Pair { f, g, .. }) => {
            let d = member.apply(f).minus(&limit.apply(f));
            inner(g, &d).norm()
        }
        // A vector probe in weak mode is paired with itself; a pair probe in a
        // strong-type mode uses its first vector.
        (Mode::Weak, Probe::Vector { v, .. }) | (Mode::WeakToZero, Probe::Vector { v, .. }) => {
            let d = member.apply(v).minus(&limit.apply(v));
            inner(v, &d).norm()
        }
        (Mode::Strong, Probe::Pair { f, .. }) | (Mode::Norm, Probe::Pair { f, .. }) => {
            member.apply(f).minus(&limit.apply(f)).norm()
        }
        (Mode::StarStrong, Probe::Pair { f, .. }) => {
            let fwd = member.apply(f).minus(&limit.apply(f)).norm();
            let adj = member.apply_adjoint(f).minus(&limit.apply_adjoint(f)).norm();
            fwd + adj
        }
    }
}

/// Default probe set for a family: the first eight enumerated basis vectors
/// of the limit's space plus two seeded pseudo-random finitely supported
/// vectors.
pub fn default_probes(space: &Operator, seed: u64) -> Vec<Probe> {
    let mut probes: Vec<Probe> = (0..8)
        .map(|i| {
            let l = space.label_at(i);
            Probe::Vector { id: format!("basis:{l}"), v: SparseVector::basis(l) }
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..2 {
        let mut entries = Vec::new();
        for i in 0..16 {
            if rng.gen_bool(0.3) {
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = rng.gen_range(-1.0..1.0);
                entries.push((space.label_at(i), Scalar::new(re, im)));
            }
        }
        let v = SparseVector::from_entries(entries).normalized();
        let v = if v.is_zero() {
            SparseVector::basis(space.label_at(k))
        } else {
            v
        };
        probes.push(Probe::Vector { id: format!("random:{k}"), v });
    }
    probes
}

/// Default probes for weak-to-zero runs: entries of the first column,
/// `(f, g) = (e_0, e_j)` for the first eight enumerated labels, plus two
/// seeded pseudo-random `g`'s.
pub fn weak_pair_probes(space: &Operator, seed: u64) -> Vec<Probe> {
    let f = SparseVector::basis(space.label_at(0));
    let mut probes: Vec<Probe> = (0..8)
        .map(|j| {
            let g = space.label_at(j);
            Probe::Pair {
                id: format!("pair:{}:{}", space.label_at(0), g),
                f: f.clone(),
                g: SparseVector::basis(g),
            }
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..2 {
        let mut entries = Vec::new();
        for i in 0..16 {
            if rng.gen_bool(0.3) {
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = rng.gen_range(-1.0..1.0);
                entries.push((space.label_at(i), Scalar::new(re, im)));
            }
        }
        let g = SparseVector::from_entries(entries).normalized();
        let g = if g.is_zero() {
            SparseVector::basis(space.label_at(k))
        } else {
            g
        };
        probes.push(Probe::Pair { id: format!("pair:random:{k}"), f: f.clone(), g });
    }
    probes
}

/// Fills the per-(n, probe) deviation table. Monotonicity in `n` is not
/// asserted; the raw table is the deliverable.
pub fn deviation_profile(
    f: &FamilyHandle,
    mode: Mode,
    probes: &[Probe],
    n_max: u32,
    seed: u64,
) -> ConvergenceReport {
    assert!(n_max >= 1);
    assert!(!probes.is_empty());
    let mut rows = Vec::with_capacity(n_max as usize * probes.len());
    for n in 1..=n_max {
        let member = (f.member)(n);
        for p in probes {
            rows.push(DeviationRow {
                n,
                probe_id: p.id().to_string(),
                deviation: deviation(&member, &f.limit, mode, p),
            });
        }
    }
    ConvergenceReport {
        family: f.name.clone(),
        params: f.params.clone(),
        mode,
        n_max,
        seed,
        rows,
        cov_track: Vec::new(),
        limit_cov: None,
        semicontinuity_flag: false,
    }
}

/// Covariance intervals along the sequence plus the limit, with a
/// lower-semicontinuity violation flag over the tail window
/// `[n_max/2, n_max]`.
pub fn covariance_track(f: &FamilyHandle, n_max: u32, depth: usize) -> ConvergenceReport {
    assert!(n_max >= 1 && depth >= 1);
    let cov_track: Vec<CovTrackRow> = (1..=n_max)
        .map(|n| CovTrackRow { n, cov: covariance_bounds(&(f.member)(n), depth) })
        .collect();
    let limit_cov = covariance_bounds(&f.limit, depth);
    let tail_start = (n_max / 2).max(1);
    let tail_min_upper = cov_track
        .iter()
        .filter(|r| r.n >= tail_start)
        .map(|r| r.cov.upper)
        .fold(f64::INFINITY, f64::min);
    // Covariance lower semicontinuity holds along strongly (hence *-strongly
    // or norm) convergent sequences; weak limits carry no such bound.
    let flag = f.claimed_mode != Mode::WeakToZero
        && f.claimed_mode != Mode::Weak
        && limit_cov.lower > tail_min_upper + 1e-9;
    ConvergenceReport {
        family: f.name.clone(),
        params: f.params.clone(),
        mode: f.claimed_mode,
        n_max,
        seed: 0,
        rows: Vec::new(),
        cov_track,
        limit_cov: Some(limit_cov),
        semicontinuity_flag: flag,
    }
}

pub type MemberFn = Arc<dyn Fn(u32) -> Operator + Send + Sync>;
