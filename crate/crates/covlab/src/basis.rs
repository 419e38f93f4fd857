//! Labels for a countable orthonormal basis and finitely supported vectors.
//!
//! The inner product is **linear in the second argument** and conjugate-linear
//! in the first: `inner(u, v) = Σ conj(u_ℓ) · v_ℓ`. This convention is fixed
//! once here and used everywhere else in the crate.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

/// Amplitudes smaller than this fraction of the largest modulus in a vector
/// are pruned, keeping supports finite under repeated algebra.
pub const PRUNE_REL: f64 = 1e-15;

pub type Scalar = Complex64;

/// Hierarchical index into the countable orthonormal basis.
///
/// `path` holds small component tags ("1"/"2" for block decompositions,
/// decimal summand indices for orthogonal sums); `index` is the position
/// within the leaf basis `{e_0, e_1, ...}`.
///
/// Labels are totally ordered lexicographically on `path`, then `index`;
/// that order drives every deterministic iteration in the crate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisLabel {
    pub path: Vec<String>,
    pub index: u128,
}

impl BasisLabel {
    pub fn plain(index: u128) -> Self {
        BasisLabel { path: Vec::new(), index }
    }

    pub fn with_path(path: Vec<String>, index: u128) -> Self {
        BasisLabel { path, index }
    }

    /// Prepends `tag` to the path.
    pub fn prefixed(&self, tag: &str) -> Self {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.push(tag.to_string());
        path.extend(self.path.iter().cloned());
        BasisLabel { path, index: self.index }
    }

    /// Removes a leading `tag` from the path, if present.
    pub fn strip_prefix(&self, tag: &str) -> Option<Self> {
        match self.path.first() {
            Some(head) if head == tag => Some(BasisLabel {
                path: self.path[1..].to_vec(),
                index: self.index,
            }),
            _ => None,
        }
    }

    pub fn head_tag(&self) -> Option<&str> {
        self.path.first().map(|s| s.as_str())
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "e{}", self.index)
        } else {
            write!(f, "[{}]e{}", self.path.join("."), self.index)
        }
    }
}

/// Finitely supported complex vector over the labeled basis.
///
/// Stored amplitudes are never exactly zero; construction prunes entries with
/// modulus below `PRUNE_REL` times the largest modulus.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseVector {
    entries: BTreeMap<BasisLabel, Scalar>,
}

impl SparseVector {
    pub fn zero() -> Self {
        SparseVector { entries: BTreeMap::new() }
    }

    /// The basis vector `e_label`.
    pub fn basis(label: BasisLabel) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert(label, Scalar::new(1.0, 0.0));
        SparseVector { entries }
    }

    /// Builds a vector from (label, amplitude) pairs, accumulating duplicates
    /// and pruning relative zeros.
    pub fn from_entries<I: IntoIterator<Item = (BasisLabel, Scalar)>>(iter: I) -> Self {
        let mut entries: BTreeMap<BasisLabel, Scalar> = BTreeMap::new();
        for (label, amp) in iter {
            *entries.entry(label).or_insert(Scalar::new(0.0, 0.0)) += amp;
        }
        let mut v = SparseVector { entries };
        v.prune();
        v
    }

    fn prune(&mut self) {
        let max = self
            .entries
            .values()
            .map(|a| a.norm())
            .fold(0.0f64, f64::max);
        if max == 0.0 {
            self.entries.clear();
            return;
        }
        let cut = PRUNE_REL * max;
        self.entries.retain(|_, a| a.norm() >= cut);
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, label: &BasisLabel) -> Scalar {
        self.entries.get(label).copied().unwrap_or(Scalar::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisLabel, &Scalar)> {
        self.entries.iter()
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, c: Scalar) -> Self {
        SparseVector::from_entries(self.entries.iter().map(|(l, a)| (l.clone(), c * a)))
    }

    pub fn plus(&self, other: &Self) -> Self {
        self.add_scaled(Scalar::new(1.0, 0.0), other)
    }

    pub fn minus(&self, other: &Self) -> Self {
        self.add_scaled(Scalar::new(-1.0, 0.0), other)
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, c: Scalar, other: &Self) -> Self {
        SparseVector::from_entries(
            self.entries
                .iter()
                .map(|(l, a)| (l.clone(), *a))
                .chain(other.entries.iter().map(|(l, a)| (l.clone(), c * a))),
        )
    }

    /// Relabels every support label.
    pub fn map_labels<F: Fn(&BasisLabel) -> BasisLabel>(&self, f: F) -> Self {
        SparseVector::from_entries(self.entries.iter().map(|(l, a)| (f(l), *a)))
    }

    /// Relabels support labels, dropping those mapped to `None`
    /// (orthogonal projection followed by relabeling).
    pub fn filter_map_labels<F: Fn(&BasisLabel) -> Option<BasisLabel>>(&self, f: F) -> Self {
        SparseVector::from_entries(
            self.entries
                .iter()
                .filter_map(|(l, a)| f(l).map(|m| (m, *a))),
        )
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scale(Scalar::new(1.0 / n, 0.0))
        }
    }
}

/// Inner product, conjugate-linear in `u`, linear in `v`.
pub fn inner(u: &SparseVector, v: &SparseVector) -> Scalar {
    // Iterate the smaller support.
    let (small, large, conj_small) = if u.support_len() <= v.support_len() {
        (u, v, true)
    } else {
        (v, u, false)
    };
    let mut acc = Scalar::new(0.0, 0.0);
    for (label, a) in small.iter() {
        let b = large.entry(label);
        if conj_small {
            acc += a.conj() * b;
        } else {
            acc += b.conj() * a;
        }
    }
    acc
}

/// Modified Gram-Schmidt with rank detection: vectors whose residual norm
/// after projection is at most `tol` are dropped.
pub fn gram_schmidt(vs: &[SparseVector], tol: f64) -> Vec<SparseVector> {
    assert!(tol > 0.0, "gram_schmidt: tol must be positive");
    let mut basis: Vec<SparseVector> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for b in &basis {
            let c = inner(b, &w);
            w = w.add_scaled(-c, b);
        }
        if w.norm() > tol {
            basis.push(w.normalized());
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(i: u128) -> SparseVector {
        SparseVector::basis(BasisLabel::plain(i))
    }

    #[test]
    fn inner_orthonormality() {
        assert_eq!(inner(&e(0), &e(0)), Scalar::new(1.0, 0.0));
        assert_eq!(inner(&e(0), &e(1)), Scalar::new(0.0, 0.0));
    }

    #[test]
    fn inner_convention_linear_in_second() {
        // u = e_0 + i e_1; <u, e_1> = conj(i) = -i under the fixed convention.
        let u = e(0).add_scaled(Scalar::new(0.0, 1.0), &e(1));
        let val = inner(&u, &e(1));
        assert_eq!(val, Scalar::new(0.0, -1.0));
        assert!((val.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gram_schmidt_duplicate_dropped() {
        let out = gram_schmidt(&[e(0), e(0)], 1e-12);
        assert_eq!(out.len(), 1);
        assert!((inner(&out[0], &e(0)).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_schmidt_projection_step() {
        let out = gram_schmidt(&[e(0), e(0).plus(&e(1))], 1e-12);
        assert_eq!(out.len(), 2);
        assert!((out[0].minus(&e(0))).norm() < 1e-12);
        assert!((out[1].minus(&e(1))).norm() < 1e-12);
    }

    #[test]
    fn gram_schmidt_normalizes() {
        let out = gram_schmidt(&[e(3).scale(Scalar::new(2.0, 0.0))], 1e-12);
        assert_eq!(out.len(), 1);
        assert!((out[0].minus(&e(3))).norm() < 1e-12);
    }

    #[test]
    fn pruning_keeps_supports_finite() {
        let tiny = Scalar::new(1e-40, 0.0);
        let v = SparseVector::from_entries(vec![
            (BasisLabel::plain(0), Scalar::new(1.0, 0.0)),
            (BasisLabel::plain(1), tiny),
        ]);
        assert_eq!(v.support_len(), 1);
    }

    #[test]
    fn label_order_is_path_then_index() {
        let a = BasisLabel::plain(7);
        let b = BasisLabel::with_path(vec!["1".into()], 0);
        assert!(a < b);
        let c = BasisLabel::with_path(vec!["1".into()], 1);
        assert!(b < c);
    }

    fn arb_vector() -> impl Strategy<Value = SparseVector> {
        proptest::collection::vec((0u128..32, -4.0f64..4.0, -4.0f64..4.0), 0..6).prop_map(
            |entries| {
                SparseVector::from_entries(
                    entries
                        .into_iter()
                        .map(|(i, re, im)| (BasisLabel::plain(i), Scalar::new(re, im))),
                )
            },
        )
    }

    proptest! {
        #[test]
        fn inner_conjugate_symmetry(u in arb_vector(), v in arb_vector()) {
            let a = inner(&u, &v);
            let b = inner(&v, &u).conj();
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
        }

        #[test]
        fn parallelogram_law(u in arb_vector(), v in arb_vector()) {
            let lhs = u.plus(&v).norm_sq() + u.minus(&v).norm_sq();
            let rhs = 2.0 * u.norm_sq() + 2.0 * v.norm_sq();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }

        #[test]
        fn gram_schmidt_output_orthonormal(vs in proptest::collection::vec(arb_vector(), 1..5)) {
            let tol = 1e-10;
            let out = gram_schmidt(&vs, tol);
            for (i, a) in out.iter().enumerate() {
                for (j, b) in out.iter().enumerate() {
                    let g = inner(a, b).norm();
                    let want = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((g - want).abs() <= 10.0 * tol);
                }
            }
        }
    }
}
