//! Constructors for the concrete operators and operator sequences the
//! certificates are exercised on: 2-isometric weighted shifts, Brownian-type
//! block operators, power envelopes, convergent families, approximants built
//! from label-permutation unitaries, and structure-limited extensions.

use std::sync::Arc;

use crate::basis::{BasisLabel, Scalar, SparseVector};
use crate::converge::Mode;
use crate::operator::{DeltaHint, Node, Operator, PhaseFn, Subspace};
use crate::Error;

/// How far label scans go when a closed-form inverse enumeration is not
/// available. Generous for desk-scale depths (<= 512).
const SCAN_CAP: usize = 1 << 16;

fn one() -> Scalar {
    Scalar::new(1.0, 0.0)
}

fn re(x: f64) -> Scalar {
    Scalar::new(x, 0.0)
}

/// A sequence of operators together with its limit and the convergence claims
/// attached to it.
#[derive(Clone)]
pub struct FamilyHandle {
    pub name: String,
    /// Construction parameters, echoed verbatim into reports.
    pub params: serde_json::Value,
    pub limit: Operator,
    /// `member(n)` for n >= 1.
    pub member: Arc<dyn Fn(u32) -> Operator + Send + Sync>,
    pub claimed_mode: Mode,
    pub claimed_member_cov: CovClaim,
    pub claimed_limit_cov: f64,
}

#[derive(Clone)]
pub enum CovClaim {
    Constant(f64),
    PerIndex(Arc<dyn Fn(u32) -> f64 + Send + Sync>),
}

impl CovClaim {
    pub fn at(&self, n: u32) -> f64 {
        match self {
            CovClaim::Constant(c) => *c,
            CovClaim::PerIndex(f) => f(n),
        }
    }
}

/// `n`-th power data of a block operator: `T^n` and the norm of its corner
/// block.
pub struct PowerEnvelope {
    pub n: u32,
    pub e_norm: f64,
    pub t_power: Operator,
}

/// 2-isometric unilateral weighted shift with weights
/// `w_n = sqrt((1 + (n+1)(λ²−1)) / (1 + n(λ²−1)))`, λ > 1.
pub fn js01_shift(lambda: f64) -> Result<Operator, Error> {
    if !(lambda > 1.0) {
        return Err(Error::InvalidParameter {
            name: "lambda".into(),
            reason: "must exceed 1".into(),
        });
    }
    let c = lambda * lambda - 1.0;
    let op = Operator::weighted_shift(Arc::new(move |n| {
        let nf = n as f64;
        ((1.0 + (nf + 1.0) * c) / (1.0 + nf * c)).sqrt()
    }))
    // Δ is diagonal with entries (λ²−1)/(1+n(λ²−1)), decreasing from λ²−1.
    .with_delta_hint(DeltaHint::DiagonalSup(c))
    .with_norm_hint(lambda);
    Ok(op)
}

/// The isometric 2-isometry `[V E; 0 X]` with `V e_k = e_{2k+2}`,
/// `E = sqrt(1−q)·(e_k ↦ e_{4k+1})`, `X = sqrt(q)·I`, 0 < q < 1.
///
/// ran V (even indices ≥ 2) is orthogonal to ran E (indices ≡ 1 mod 4) and
/// their sum is a proper subspace of the first component, which is what makes
/// the powers weakly but not uniformly stable.
pub fn clidr_two_isometry(q: f64) -> Result<Operator, Error> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter {
            name: "q".into(),
            reason: "must lie strictly between 0 and 1".into(),
        });
    }
    let v = Operator::injection(
        Arc::new(|k| 2 * k + 2),
        Arc::new(|m| (m >= 2 && m % 2 == 0).then(|| (m - 2) / 2)),
    );
    let e0 = Operator::injection(
        Arc::new(|k| 4 * k + 1),
        Arc::new(|m| (m % 4 == 1).then(|| (m - 1) / 4)),
    );
    let x = Operator::scaled(re(q.sqrt()), &Operator::identity());
    let op = Operator::block_upper(&v, &e0, &x, (1.0 - q).sqrt())
        .with_delta_hint(DeltaHint::DiagonalSup(0.0))
        .with_norm_hint(1.0);
    Ok(op)
}

/// Canonical Brownian-type block `[V σE; 0 U]` with `V e_k = e_{2k}`,
/// `E e_k = e_{2k+1}` (so ran V ⊕ ran E is all of the first component) and
/// `U` the diagonal unitary with the given phases.
pub fn canonical_brownian_with_phases(
    sigma: f64,
    u_phases: PhaseFn,
) -> Result<Operator, Error> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma".into(),
            reason: "must be positive".into(),
        });
    }
    let v = Operator::injection(
        Arc::new(|k| 2 * k),
        Arc::new(|m| (m % 2 == 0).then(|| m / 2)),
    );
    let e = Operator::injection(
        Arc::new(|k| 2 * k + 1),
        Arc::new(|m| (m % 2 == 1).then(|| (m - 1) / 2)),
    );
    let u = Operator::diagonal_unitary(u_phases);
    Ok(Operator::block_upper(&v, &e, &u, sigma)
        .with_delta_hint(DeltaHint::DiagonalSup(sigma * sigma))
        .with_norm_hint((1.0 + sigma * sigma).sqrt()))
}

pub fn canonical_brownian(sigma: f64) -> Result<Operator, Error> {
    canonical_brownian_with_phases(sigma, Arc::new(|_| Scalar::new(1.0, 0.0)))
}

/// Block `[V σE; 0 X]` with canonical even/odd `V`, `E` and the unilateral
/// shift in the `X` slot. `X` is a non-unitary isometry, so the operator is a
/// 2-isometry but fails the block characterization's condition (ii).
pub fn shift_tail_block(sigma: f64) -> Result<Operator, Error> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma".into(),
            reason: "must be positive".into(),
        });
    }
    let v = Operator::injection(
        Arc::new(|k| 2 * k),
        Arc::new(|m| (m % 2 == 0).then(|| m / 2)),
    );
    let e = Operator::injection(
        Arc::new(|k| 2 * k + 1),
        Arc::new(|m| (m % 2 == 1).then(|| (m - 1) / 2)),
    );
    Ok(Operator::block_upper(&v, &e, &Operator::shift(), sigma)
        .with_delta_hint(DeltaHint::DiagonalSup(sigma * sigma))
        .with_norm_hint((1.0 + sigma * sigma).sqrt()))
}

/// `T^n` and its corner-block norm for a `block_upper` operator
/// `T = [V sE; 0 X]`. The corner of `T^n` is `E_n = Σ_{j<n} V^j (sE) X^{n−1−j}`,
/// and when every `X*^j X^j` is diagonal its norm satisfies
/// `‖E_n‖² = s² · sup_k Σ_{j<n} ‖X^j e_k‖²` (isometric `E`).
pub fn power_envelope(t: &Operator, n: u32) -> Result<PowerEnvelope, Error> {
    if n < 1 {
        return Err(Error::InvalidParameter {
            name: "n".into(),
            reason: "must be at least 1".into(),
        });
    }
    let (x, s) = match t.node() {
        Node::BlockUpper { u, s, .. } => (u.clone(), *s),
        _ => {
            return Err(Error::UnsupportedStructure {
                op: "power_envelope".into(),
                reason: "operator was not built by block_upper".into(),
            })
        }
    };

    let mut t_power = t.clone();
    for _ in 1..n {
        t_power = Operator::compose(&t_power, t);
    }

    // Diagonal route: verify X*^j X^j diagonal on probe labels while summing
    // the diagonal entries; `‖E_n‖² = s² sup_k Σ_{j<n} ⟨X*^j X^j e_k, e_k⟩`.
    let probes = 12u128;
    let mut diag_ok = true;
    let mut best = 0.0f64;
    'outer: for k in 0..probes {
        let ek = SparseVector::basis(BasisLabel::plain(k));
        let mut y = ek.clone();
        let mut acc = 0.0f64;
        for j in 0..n {
            // z = X*^j y = X*^j X^j e_k must be a multiple of e_k.
            let mut z = y.clone();
            for _ in 0..j {
                z = x.apply_adjoint(&z);
            }
            let diag = z.entry(&BasisLabel::plain(k));
            if z.add_scaled(-diag, &ek).norm() > 1e-10 * (1.0 + diag.norm()) {
                diag_ok = false;
                break 'outer;
            }
            acc += diag.re;
            y = x.apply(&y);
        }
        best = best.max(acc);
    }
    let e_norm = if diag_ok {
        s * best.max(0.0).sqrt()
    } else {
        corner_norm(&t_power)
    };
    Ok(PowerEnvelope { n, e_norm, t_power })
}

/// Largest singular value of the upper-right corner of a block operator,
/// estimated from the first few second-component columns.
fn corner_norm(t_power: &Operator) -> f64 {
    let cols = 8usize;
    let col_vecs: Vec<SparseVector> = (0..cols)
        .map(|k| {
            t_power
                .forward(&BasisLabel::plain(k as u128).prefixed("2"))
                .filter_map_labels(|l| l.strip_prefix("1"))
        })
        .collect();
    let mut row_labels: Vec<BasisLabel> = col_vecs
        .iter()
        .flat_map(|v| v.iter().map(|(l, _)| l.clone()))
        .collect();
    row_labels.sort();
    row_labels.dedup();
    if row_labels.is_empty() {
        return 0.0;
    }
    let mut m = nalgebra::DMatrix::<Scalar>::zeros(row_labels.len(), cols);
    for (j, v) in col_vecs.iter().enumerate() {
        for (i, l) in row_labels.iter().enumerate() {
            m[(i, j)] = v.entry(l);
        }
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Sequence of Brownian-type operators converging *-strongly to a diagonal
/// unitary. `member(n)` fixes the first `n` basis vectors (phases `lambdas`),
/// shifts the tail, and carries a single covariance-σ direction at position
/// `n`; the limit is the diagonal unitary itself.
pub fn prz1_family(
    sigma: f64,
    lambdas: Option<PhaseFn>,
    zs: Option<PhaseFn>,
) -> Result<FamilyHandle, Error> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma".into(),
            reason: "must be positive".into(),
        });
    }
    let lam: PhaseFn = lambdas.unwrap_or_else(|| Arc::new(|_| Scalar::new(1.0, 0.0)));
    let zph: PhaseFn = zs.unwrap_or_else(|| Arc::new(|_| Scalar::new(1.0, 0.0)));

    let limit = Operator::diagonal_unitary(lam.clone());

    let member = {
        let lam = lam.clone();
        let zph = zph.clone();
        Arc::new(move |n: u32| {
            let cut = n as u128;
            let lam_f = lam.clone();
            let lam_a = lam.clone();
            let z_f = zph(cut);
            let forward = Arc::new(move |l: &BasisLabel| -> SparseVector {
                if !l.path.is_empty() {
                    return SparseVector::zero();
                }
                let i = l.index;
                if i < cut {
                    SparseVector::from_entries([(BasisLabel::plain(i), lam_f(i))])
                } else if i == cut {
                    SparseVector::from_entries([
                        (BasisLabel::plain(cut + 1), re(sigma)),
                        (BasisLabel::plain(cut), z_f),
                    ])
                } else {
                    SparseVector::basis(BasisLabel::plain(i + 1))
                }
            });
            let z_a = zph(cut);
            let adjoint = Arc::new(move |l: &BasisLabel| -> SparseVector {
                if !l.path.is_empty() {
                    return SparseVector::zero();
                }
                let i = l.index;
                if i < cut {
                    SparseVector::from_entries([(BasisLabel::plain(i), lam_a(i).conj())])
                } else if i == cut {
                    SparseVector::from_entries([(BasisLabel::plain(cut), z_a.conj())])
                } else if i == cut + 1 {
                    SparseVector::from_entries([(BasisLabel::plain(cut), re(sigma))])
                } else {
                    SparseVector::basis(BasisLabel::plain(i - 1))
                }
            });
            Operator::custom(forward, adjoint, Arc::new(|i| BasisLabel::plain(i as u128)))
                .with_delta_hint(DeltaHint::DiagonalSup(sigma * sigma))
                .with_norm_hint((1.0 + sigma * sigma).sqrt())
        })
    };

    Ok(FamilyHandle {
        name: "prz1".into(),
        params: serde_json::json!({ "sigma": sigma }),
        limit,
        member,
        claimed_mode: Mode::StarStrong,
        claimed_member_cov: CovClaim::Constant(sigma),
        claimed_limit_cov: 0.0,
    })
}

// ---- przew2: block partition of the second component -----------------------
//
// The second component is partitioned into infinitely many infinite blocks
// M_b = { ("2", j) : the 2-adic valuation of j+1 equals b-1 }, b >= 1.
// elem(b, i) is the i-th index of block b.

fn block_of(j: u128) -> u32 {
    (j + 1).trailing_zeros() + 1
}

fn pos_in_block(j: u128) -> u128 {
    let b = block_of(j);
    (((j + 1) >> (b - 1)) - 1) / 2
}

fn elem(b: u32, i: u128) -> u128 {
    (1u128 << (b - 1)) * (2 * i + 1) - 1
}

fn przew2_operator(sigma: f64, cutoff: Option<u32>) -> Operator {
    let wized = move |b: u32| cutoff.map_or(true, |n| b <= n);
    let forward = Arc::new(move |l: &BasisLabel| -> SparseVector {
        if let Some(sub) = l.strip_prefix("1") {
            SparseVector::basis(BasisLabel::plain(2 * sub.index).prefixed("1"))
        } else if let Some(sub) = l.strip_prefix("2") {
            let j = sub.index;
            let b = block_of(j);
            if wized(b) {
                // W_b pairs the i-th vector of M_b with the i-th vector of
                // E(M_b) ⊕ M_b, interleaved.
                let i = pos_in_block(j);
                if i % 2 == 0 {
                    SparseVector::basis(
                        BasisLabel::plain(2 * elem(b, i / 2) + 1).prefixed("1"),
                    )
                } else {
                    SparseVector::basis(
                        BasisLabel::plain(elem(b, (i - 1) / 2)).prefixed("2"),
                    )
                }
            } else {
                SparseVector::from_entries([
                    (BasisLabel::plain(2 * j + 1).prefixed("1"), re(sigma)),
                    (BasisLabel::plain(j).prefixed("2"), one()),
                ])
            }
        } else {
            SparseVector::zero()
        }
    });
    let adjoint = Arc::new(move |l: &BasisLabel| -> SparseVector {
        if let Some(sub) = l.strip_prefix("1") {
            let m = sub.index;
            if m % 2 == 0 {
                SparseVector::basis(BasisLabel::plain(m / 2).prefixed("1"))
            } else {
                let j = (m - 1) / 2;
                let b = block_of(j);
                if wized(b) {
                    let r = pos_in_block(j);
                    SparseVector::basis(BasisLabel::plain(elem(b, 2 * r)).prefixed("2"))
                } else {
                    SparseVector::from_entries([(
                        BasisLabel::plain(j).prefixed("2"),
                        re(sigma),
                    )])
                }
            }
        } else if let Some(sub) = l.strip_prefix("2") {
            let j = sub.index;
            let b = block_of(j);
            if wized(b) {
                let i = pos_in_block(j);
                SparseVector::basis(BasisLabel::plain(elem(b, 2 * i + 1)).prefixed("2"))
            } else {
                SparseVector::basis(BasisLabel::plain(j).prefixed("2"))
            }
        } else {
            SparseVector::zero()
        }
    });
    let labels = Arc::new(|i: usize| {
        let k = (i / 2) as u128;
        if i % 2 == 0 {
            BasisLabel::plain(k).prefixed("1")
        } else {
            BasisLabel::plain(k).prefixed("2")
        }
    });
    let (dh, nh) = if cutoff.is_some() {
        (sigma * sigma, (1.0 + sigma * sigma).sqrt())
    } else {
        (0.0, 1.0)
    };
    Operator::custom(forward, adjoint, labels)
        .with_delta_hint(DeltaHint::DiagonalSup(dh))
        .with_norm_hint(nh)
}

/// Sequence of Brownian-type block operators converging *-strongly to a
/// unitary. `member(n)` replaces the σE-coupling on the first `n` blocks of
/// the second component by a unitary pairing; the limit does so on every
/// block.
pub fn przew2_family(sigma: f64) -> Result<FamilyHandle, Error> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma".into(),
            reason: "must be positive".into(),
        });
    }
    Ok(FamilyHandle {
        name: "przew2".into(),
        params: serde_json::json!({ "sigma": sigma }),
        limit: przew2_operator(sigma, None),
        member: Arc::new(move |n| przew2_operator(sigma, Some(n))),
        claimed_mode: Mode::StarStrong,
        claimed_member_cov: CovClaim::Constant(sigma),
        claimed_limit_cov: 0.0,
    })
}

/// Blocks `[V σ_n E; 0 U]` with σ_n → 0: norm-convergent to the (non-unitary)
/// isometry `V ⊕ U`.
pub fn sslnv_family(sigma_seq: Arc<dyn Fn(u32) -> f64 + Send + Sync>) -> Result<FamilyHandle, Error> {
    let v = Operator::injection(
        Arc::new(|k| 2 * k),
        Arc::new(|m| (m % 2 == 0).then(|| m / 2)),
    );
    let e = Operator::injection(
        Arc::new(|k| 2 * k + 1),
        Arc::new(|m| (m % 2 == 1).then(|| (m - 1) / 2)),
    );
    let limit = Operator::block_upper(&v, &e, &Operator::identity(), 0.0)
        .with_delta_hint(DeltaHint::DiagonalSup(0.0))
        .with_norm_hint(1.0);
    let seq = sigma_seq.clone();
    let member = Arc::new(move |n: u32| {
        let s = seq(n.max(1));
        canonical_brownian(s).expect("sigma_seq must be positive")
    });
    Ok(FamilyHandle {
        name: "sslnv".into(),
        params: serde_json::json!({ "sigma_seq": "caller-provided" }),
        limit,
        member,
        claimed_mode: Mode::Norm,
        claimed_member_cov: CovClaim::PerIndex(sigma_seq),
        claimed_limit_cov: 0.0,
    })
}

/// Constant family: every member is the canonical Brownian block itself.
pub fn canonical_family(sigma: f64) -> Result<FamilyHandle, Error> {
    let t = canonical_brownian(sigma)?;
    let limit = t.clone();
    Ok(FamilyHandle {
        name: "canonical".into(),
        params: serde_json::json!({ "sigma": sigma }),
        limit,
        member: Arc::new(move |_| t.clone()),
        claimed_mode: Mode::Strong,
        claimed_member_cov: CovClaim::Constant(sigma),
        claimed_limit_cov: sigma,
    })
}

/// Powers of the isometric 2-isometry viewed as a family with zero limit
/// (weak stability).
pub fn clidr_power_family(q: f64) -> Result<FamilyHandle, Error> {
    let t = clidr_two_isometry(q)?;
    let limit = Operator::scaled(Scalar::new(0.0, 0.0), &t);
    let base = t.clone();
    let member = Arc::new(move |n: u32| {
        let mut p = base.clone();
        for _ in 1..n.max(1) {
            p = Operator::compose(&p, &base);
        }
        p.with_delta_hint(DeltaHint::DiagonalSup(0.0)).with_norm_hint(1.0)
    });
    Ok(FamilyHandle {
        name: "clidr".into(),
        params: serde_json::json!({ "q": q }),
        limit,
        member,
        claimed_mode: Mode::WeakToZero,
        claimed_member_cov: CovClaim::Constant(0.0),
        claimed_limit_cov: 0.0,
    })
}

// ---- approximants built from label-permutation unitaries -------------------

fn h_index_of(t: &Operator, l: &BasisLabel) -> Option<usize> {
    t.space_index_of(l, SCAN_CAP)
}

/// `k`-th label of `R`'s space that lies outside the embedded copy of `H`.
fn complement_label(r: &Operator, embed: &Subspace, k: usize) -> Option<BasisLabel> {
    let mut seen = 0usize;
    for i in 0..SCAN_CAP {
        let l = r.label_at(i);
        if embed.index_of(&l).is_none() {
            if seen == k {
                return Some(l);
            }
            seen += 1;
        }
    }
    None
}

/// Position of `l` among `R`-labels outside the embedded `H`.
fn complement_index(r: &Operator, embed: &Subspace, l: &BasisLabel) -> Option<usize> {
    let mut seen = 0usize;
    for i in 0..SCAN_CAP {
        let cand = r.label_at(i);
        if embed.index_of(&cand).is_none() {
            if &cand == l {
                return Some(seen);
            }
            seen += 1;
        }
    }
    None
}

/// `T_n = U_n* R U_n` where the unitary `U_n : H → K` is the identity on the
/// span of the first `N'` basis vectors of `H` (chosen so that it contains
/// `e_1..e_n` and their images under `T`) and pairs the two tail bases by a
/// fixed fair interleaving. Since `U_n` maps basis vectors to basis vectors,
/// `T_n f = T f` holds exactly for `f` in the span of `e_1..e_n`.
pub fn bishop_approximant(
    r: &Operator,
    embed: &Subspace,
    t: &Operator,
    n: u32,
) -> Result<Operator, Error> {
    let n_us = n.max(1) as usize;
    let mut nprime = n_us;
    for i in 0..n_us {
        let h = t.label_at(i);
        let img_t = t.forward(&h);
        // Extension check: R agrees with T on the embedded label.
        let emb_h = embed.label_at(i);
        let img_r = r.forward(&emb_h);
        let mut img_t_in_k = SparseVector::zero();
        for (l, amp) in img_t.iter() {
            let p = h_index_of(t, l).ok_or_else(|| Error::UnsupportedStructure {
                op: "bishop_approximant".into(),
                reason: format!("image label {l} not found in the restricted space"),
            })?;
            img_t_in_k = img_t_in_k.add_scaled(*amp, &SparseVector::basis(embed.label_at(p)));
            nprime = nprime.max(p + 1);
        }
        if img_r.minus(&img_t_in_k).norm() > 1e-9 {
            return Err(Error::ExtensionMismatch { label: emb_h.to_string() });
        }
    }

    // Does K properly contain the embedded H?
    let has_complement = (0..512).any(|i| embed.index_of(&r.label_at(i)).is_none());

    let u_fwd: Arc<dyn Fn(&BasisLabel) -> BasisLabel + Send + Sync> = {
        let t = t.clone();
        let embed = embed.clone();
        let r = r.clone();
        Arc::new(move |l: &BasisLabel| {
            let p = h_index_of(&t, l).expect("label outside scanned space");
            if p < nprime || !has_complement {
                embed.label_at(p)
            } else {
                let q = p - nprime;
                if q % 2 == 0 {
                    embed.label_at(nprime + q / 2)
                } else {
                    complement_label(&r, &embed, q / 2)
                        .expect("complement exhausted within scan cap")
                }
            }
        })
    };
    let u_inv: Arc<dyn Fn(&BasisLabel) -> Option<BasisLabel> + Send + Sync> = {
        let t = t.clone();
        let embed = embed.clone();
        let r = r.clone();
        Arc::new(move |m: &BasisLabel| match embed.index_of(m) {
            Some(p) if p < nprime || !has_complement => Some(t.label_at(p)),
            Some(p) => Some(t.label_at(nprime + 2 * (p - nprime))),
            None => complement_index(&r, &embed, m).map(|ci| t.label_at(nprime + 2 * ci + 1)),
        })
    };

    let fwd = {
        let u_fwd = u_fwd.clone();
        Arc::new(move |l: &BasisLabel| SparseVector::basis(u_fwd(l)))
    };
    let adj = {
        let u_inv = u_inv.clone();
        Arc::new(move |m: &BasisLabel| match u_inv(m) {
            Some(h) => SparseVector::basis(h),
            None => SparseVector::zero(),
        })
    };
    let labels = {
        let t = t.clone();
        Arc::new(move |i: usize| t.label_at(i))
    };
    let u_n = Operator::custom(fwd, adj, labels);

    let mut t_n = Operator::compose(&u_n.adjoint(), &Operator::compose(r, &u_n));
    // Unitary conjugation preserves all mixed polynomial norms; in particular
    // a basis-permutation conjugation of a diagonal defect stays diagonal
    // with the same sup.
    if let Some(h) = r.delta_hint() {
        t_n.set_delta_hint(h);
    }
    if let Some(h) = r.norm_hint() {
        t_n.set_norm_hint(h);
    }
    Ok(t_n)
}

/// A subspace wrapping an operator's whole label space, with scanned inverse
/// lookup.
pub fn space_of(op: &Operator) -> Subspace {
    let o1 = op.clone();
    let o2 = op.clone();
    let o3 = op.clone();
    Subspace::new(
        Arc::new(move |l| o1.space_index_of(l, SCAN_CAP).is_some()),
        Arc::new(move |i| o2.label_at(i)),
        Arc::new(move |l| o3.space_index_of(l, SCAN_CAP)),
    )
}

/// Structure-limited Brownian extension: for a supported `T`, returns an
/// embedding of `T`'s space into a larger one and a Brownian-type `R` of
/// covariance `sigma` extending `T`.
pub fn brownian_extension(t: &Operator, sigma: f64) -> Result<(Subspace, Operator), Error> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma".into(),
            reason: "must be positive".into(),
        });
    }
    match t.node() {
        // A restriction of a block operator: the extension is the original.
        Node::Restrict { t: full, s } => {
            if matches!(full.node(), Node::BlockUpper { .. }) {
                Ok((s.clone(), full.clone()))
            } else {
                Err(Error::UnsupportedStructure {
                    op: "brownian_extension".into(),
                    reason: "restriction of a non-block operator".into(),
                })
            }
        }
        Node::BlockUpper { v, e, u, s } => {
            if (s - sigma).abs() > 1e-9 {
                return Err(Error::UnsupportedStructure {
                    op: "brownian_extension".into(),
                    reason: "block coupling does not match the requested sigma".into(),
                });
            }
            // U must be unitary on probes.
            for i in 0..32u128 {
                let l = BasisLabel::plain(i);
                let iso = u.apply_adjoint(&u.forward(&l)).minus(&SparseVector::basis(l.clone()));
                let coiso = u.apply(&u.adjoint_forward(&l)).minus(&SparseVector::basis(l.clone()));
                if iso.norm() > 1e-9 || coiso.norm() > 1e-9 {
                    return Err(Error::UnsupportedStructure {
                        op: "brownian_extension".into(),
                        reason: "U-block is not unitary".into(),
                    });
                }
            }
            // Range defect of V V* + E E* on first-component labels: 0 means
            // covered, 1 means a clean gap.
            let gap_defect = |m: u128| -> f64 {
                let l = BasisLabel::plain(m);
                let vv = v.apply(&v.adjoint_forward(&l));
                let ee = e.apply(&e.adjoint_forward(&l));
                SparseVector::basis(l).minus(&vv).minus(&ee).norm()
            };
            let mut any_gap = false;
            for m in 0..64u128 {
                let d = gap_defect(m);
                if d > 1e-9 {
                    if (d - 1.0).abs() > 1e-9 {
                        return Err(Error::UnsupportedStructure {
                            op: "brownian_extension".into(),
                            reason: "range defect of V,E is not a clean basis gap".into(),
                        });
                    }
                    any_gap = true;
                }
            }
            if !any_gap {
                return Ok((space_of(t), t.clone()));
            }
            // Adjoin a fresh summand "3" and couple it onto the gap.
            let gap_at = {
                let v = v.clone();
                let e = e.clone();
                move |k: u128| -> u128 {
                    let mut seen = 0u128;
                    for m in 0..(SCAN_CAP as u128) {
                        let l = BasisLabel::plain(m);
                        let vv = v.apply(&v.adjoint_forward(&l));
                        let ee = e.apply(&e.adjoint_forward(&l));
                        if SparseVector::basis(l).minus(&vv).minus(&ee).norm() > 0.5 {
                            if seen == k {
                                return m;
                            }
                            seen += 1;
                        }
                    }
                    panic!("gap enumeration exhausted scan cap")
                }
            };
            let gap_index_of = {
                let v = v.clone();
                let e = e.clone();
                move |m: u128| -> Option<u128> {
                    let l = BasisLabel::plain(m);
                    let vv = v.apply(&v.adjoint_forward(&l));
                    let ee = e.apply(&e.adjoint_forward(&l));
                    if SparseVector::basis(l.clone()).minus(&vv).minus(&ee).norm() < 0.5 {
                        return None;
                    }
                    let mut seen = 0u128;
                    for mm in 0..m {
                        let ll = BasisLabel::plain(mm);
                        let vv = v.apply(&v.adjoint_forward(&ll));
                        let ee = e.apply(&e.adjoint_forward(&ll));
                        if SparseVector::basis(ll).minus(&vv).minus(&ee).norm() > 0.5 {
                            seen += 1;
                        }
                    }
                    Some(seen)
                }
            };
            let t_in = t.clone();
            let ga = gap_at.clone();
            let forward = Arc::new(move |l: &BasisLabel| -> SparseVector {
                if let Some(sub) = l.strip_prefix("3") {
                    SparseVector::from_entries([
                        (BasisLabel::plain(ga(sub.index)).prefixed("1"), re(sigma)),
                        (l.clone(), one()),
                    ])
                } else {
                    t_in.forward(l)
                }
            });
            let t_in = t.clone();
            let gi = gap_index_of.clone();
            let adjoint = Arc::new(move |l: &BasisLabel| -> SparseVector {
                if l.head_tag() == Some("3") {
                    return SparseVector::basis(l.clone());
                }
                let mut out = t_in.adjoint_forward(l);
                if let Some(sub) = l.strip_prefix("1") {
                    if let Some(k) = gi(sub.index) {
                        out = out.add_scaled(
                            re(sigma),
                            &SparseVector::basis(BasisLabel::plain(k).prefixed("3")),
                        );
                    }
                }
                out
            });
            let t_in = t.clone();
            let labels = Arc::new(move |i: usize| {
                if i % 2 == 0 {
                    t_in.label_at(i / 2)
                } else {
                    BasisLabel::plain((i / 2) as u128).prefixed("3")
                }
            });
            let r = Operator::custom(forward, adjoint, labels)
                .with_delta_hint(DeltaHint::DiagonalSup(sigma * sigma))
                .with_norm_hint((1.0 + sigma * sigma).sqrt());
            // Embed: all non-"3" labels, positions taken from T's enumeration.
            let t1 = t.clone();
            let t2 = t.clone();
            let t3 = t.clone();
            let embed = Subspace::new(
                Arc::new(move |l| {
                    l.head_tag() != Some("3") && t1.space_index_of(l, SCAN_CAP).is_some()
                }),
                Arc::new(move |i| t2.label_at(i)),
                Arc::new(move |l| t3.space_index_of(l, SCAN_CAP)),
            );
            Ok((embed, r))
        }
        // Unitary route: T ⊕ (canonical Brownian of covariance sigma).
        _ => {
            for i in 0..32 {
                let l = t.label_at(i);
                let iso = t.apply_adjoint(&t.forward(&l)).minus(&SparseVector::basis(l.clone()));
                let coiso = t.apply(&t.adjoint_forward(&l)).minus(&SparseVector::basis(l.clone()));
                if iso.norm() > 1e-9 || coiso.norm() > 1e-9 {
                    return Err(Error::UnsupportedStructure {
                        op: "brownian_extension".into(),
                        reason: "operator is not unitary and has no supported block structure"
                            .into(),
                    });
                }
            }
            let b = canonical_brownian(sigma)?;
            let r = Operator::oplus(vec![t.clone(), b]);
            Ok((Subspace::component("1"), r))
        }
    }
}
