//! Lazy band operators on the labeled basis.
//!
//! An [`Operator`] is an immutable expression tree over primitive builders.
//! Evaluating it on a basis vector returns the exact (up to rounding) finitely
//! supported image; nothing is ever truncated. Every operator carries both a
//! forward action and an adjoint action, kept consistent by construction.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::basis::{BasisLabel, Scalar, SparseVector};
use crate::Error;

pub type ForwardFn = Arc<dyn Fn(&BasisLabel) -> SparseVector + Send + Sync>;
pub type LabelFn = Arc<dyn Fn(usize) -> BasisLabel + Send + Sync>;
pub type IndexMapFn = Arc<dyn Fn(u128) -> u128 + Send + Sync>;
pub type IndexInvFn = Arc<dyn Fn(u128) -> Option<u128> + Send + Sync>;
pub type WeightFn = Arc<dyn Fn(u128) -> f64 + Send + Sync>;
pub type PhaseFn = Arc<dyn Fn(u128) -> Scalar + Send + Sync>;
pub type PartFn = Arc<dyn Fn(usize) -> Operator + Send + Sync>;

/// Builder-certified information about the defect operator `T*T - I`.
#[derive(Clone, Copy, Debug)]
pub enum DeltaHint {
    /// `T*T - I` is diagonal in the labeled basis and the supremum of the
    /// absolute diagonal entries is this value.
    DiagonalSup(f64),
}

pub(crate) enum Node {
    Identity,
    Zero,
    /// `e_n -> w(n) e_{n+1}` on the leaf index, path preserved.
    WeightedShift { weight: WeightFn },
    /// `e_n -> z(n) e_n`.
    Diagonal { phase: PhaseFn },
    /// `e_k -> e_{f(k)}` for an injective `f`; `inv` is the partial inverse.
    Injection { map: IndexMapFn, inv: IndexInvFn },
    /// Cyclic permutation of the first `n` leaf indices, identity beyond.
    Cyclic { n: u128 },
    /// `[V  sE; 0  U]` on labels prefixed "1" (first component) / "2" (second).
    BlockUpper { v: Operator, e: Operator, u: Operator, s: f64 },
    /// Orthogonal sum; summand `i` acts on labels prefixed with `i+1`.
    Oplus { parts: Vec<Operator> },
    /// Countable orthogonal sum; summands produced on demand from the index.
    OplusGen { part: PartFn },
    /// `a ∘ b`.
    Compose { a: Operator, b: Operator },
    /// `a·X + b·Y`.
    AddScale { a: Scalar, x: Operator, b: Scalar, y: Operator },
    Adjoint { t: Operator },
    /// Restriction to an invariant subspace, relabeled onto plain indices via
    /// the subspace enumeration.
    Restrict { t: Operator, s: Subspace },
    /// Compression `P_S T|_S`, relabeled onto plain indices.
    Compress { t: Operator, s: Subspace },
    Custom { forward: ForwardFn, adjoint: ForwardFn, labels: LabelFn },
}

struct OpInner {
    node: Node,
    band: Option<u64>,
    norm_hint: Option<f64>,
    delta_hint: Option<DeltaHint>,
}

/// Immutable lazy linear operator with forward and adjoint basis actions.
///
/// Cloning is cheap; operators are freely shareable across threads.
#[derive(Clone)]
pub struct Operator {
    inner: Arc<OpInner>,
}

fn saturating_band(a: Option<u64>, b: Option<u64>) -> Option<u64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.saturating_add(y)),
        _ => None,
    }
}

impl Operator {
    fn new(node: Node, band: Option<u64>, norm_hint: Option<f64>) -> Self {
        Operator {
            inner: Arc::new(OpInner { node, band, norm_hint, delta_hint: None }),
        }
    }

    pub fn identity() -> Self {
        Self::new(Node::Identity, Some(0), Some(1.0))
    }

    pub fn zero() -> Self {
        Self::new(Node::Zero, Some(0), Some(0.0))
    }

    /// Unilateral shift `e_n -> e_{n+1}`.
    pub fn shift() -> Self {
        Self::weighted_shift(Arc::new(|_| 1.0)).with_norm_hint(1.0)
    }

    /// Weighted shift `e_n -> w(n) e_{n+1}`.
    pub fn weighted_shift(weight: WeightFn) -> Self {
        Self::new(Node::WeightedShift { weight }, Some(1), None)
    }

    /// Diagonal operator `e_n -> z(n) e_n`.
    pub fn diagonal(phase: PhaseFn) -> Self {
        Self::new(Node::Diagonal { phase }, Some(0), None)
    }

    /// Diagonal unitary from unimodular entries (norm hint 1).
    pub fn diagonal_unitary(phase: PhaseFn) -> Self {
        Self::new(Node::Diagonal { phase }, Some(0), Some(1.0)).with_delta_hint(DeltaHint::DiagonalSup(0.0))
    }

    /// Isometric basis injection `e_k -> e_{f(k)}`.
    pub fn injection(map: IndexMapFn, inv: IndexInvFn) -> Self {
        Self::new(Node::Injection { map, inv }, None, Some(1.0))
    }

    /// Cyclic permutation of the first `n` leaf basis vectors
    /// (`e_k -> e_{k+1 mod n}` for `k < n`), identity elsewhere.
    pub fn cyclic(n: u128) -> Self {
        assert!(n >= 1);
        Self::new(Node::Cyclic { n }, n.try_into().ok(), Some(1.0))
    }

    /// `c · T`.
    pub fn scaled(c: Scalar, t: &Operator) -> Self {
        Operator::add_scale(c, t, Scalar::new(0.0, 0.0), &Operator::zero())
    }

    pub fn adjoint(&self) -> Self {
        // Involution: unwrap a double adjoint.
        if let Node::Adjoint { t } = &self.inner.node {
            return t.clone();
        }
        Self::new(
            Node::Adjoint { t: self.clone() },
            self.inner.band,
            self.inner.norm_hint,
        )
    }

    /// `A ∘ B` (apply `B` first).
    pub fn compose(a: &Operator, b: &Operator) -> Self {
        let hint = match (a.inner.norm_hint, b.inner.norm_hint) {
            (Some(x), Some(y)) => Some(x * y),
            _ => None,
        };
        Self::new(
            Node::Compose { a: a.clone(), b: b.clone() },
            saturating_band(a.inner.band, b.inner.band),
            hint,
        )
    }

    /// `a·A + b·B`.
    pub fn add_scale(a: Scalar, x: &Operator, b: Scalar, y: &Operator) -> Self {
        let hint = match (x.inner.norm_hint, y.inner.norm_hint) {
            (Some(p), Some(q)) => Some(a.norm() * p + b.norm() * q),
            _ => None,
        };
        let band = match (x.inner.band, y.inner.band) {
            (Some(p), Some(q)) => Some(p.max(q)),
            _ => None,
        };
        Self::new(Node::AddScale { a, x: x.clone(), b, y: y.clone() }, band, hint)
    }

    /// Finite orthogonal sum; summand `i` owns labels prefixed with `i+1`.
    pub fn oplus(parts: Vec<Operator>) -> Self {
        assert!(!parts.is_empty(), "oplus: parts must be nonempty");
        let band = parts.iter().map(|p| p.inner.band).fold(Some(0u64), |acc, b| {
            match (acc, b) {
                (Some(x), Some(y)) => Some(x.max(y)),
                _ => None,
            }
        });
        let hint = parts
            .iter()
            .map(|p| p.inner.norm_hint)
            .try_fold(0.0f64, |acc, h| h.map(|h| acc.max(h)));
        // Diagonal-defect hints combine as a supremum (orthogonal-sum law).
        let delta = parts
            .iter()
            .map(|p| p.inner.delta_hint)
            .try_fold(0.0f64, |acc, h| match h {
                Some(DeltaHint::DiagonalSup(s)) => Some(acc.max(s)),
                None => None,
            })
            .map(DeltaHint::DiagonalSup);
        let mut op = Self::new(Node::Oplus { parts }, band, hint);
        if let Some(d) = delta {
            op = op.with_delta_hint(d);
        }
        op
    }

    /// Countable orthogonal sum; summand `i` (0-based) owns labels prefixed
    /// with the decimal tag `i+1` and is produced on demand.
    pub fn oplus_indexed(part: PartFn) -> Self {
        Self::new(Node::OplusGen { part }, None, None)
    }

    /// `[V  sE; 0  U]` relative to the "1"/"2" label split.
    pub fn block_upper(v: &Operator, e: &Operator, u: &Operator, s: f64) -> Self {
        assert!(s >= 0.0, "block_upper: s must be nonnegative");
        let hint = match (v.inner.norm_hint, e.inner.norm_hint, u.inner.norm_hint) {
            // Crude row bound: ||T|| <= sqrt(||V||^2 + (s||E|| + ||U||)^2).
            (Some(nv), Some(ne), Some(nu)) => {
                Some((nv * nv + (s * ne + nu) * (s * ne + nu)).sqrt())
            }
            _ => None,
        };
        Self::new(
            Node::BlockUpper { v: v.clone(), e: e.clone(), u: u.clone(), s },
            None,
            hint,
        )
    }

    /// Restriction of `T` to an invariant subspace, relabeled onto plain
    /// indices. Invariance is verified on the first `check_depth` enumerated
    /// labels of `S`.
    pub fn restrict(t: &Operator, s: &Subspace, check_depth: usize) -> Result<Self, Error> {
        for i in 0..check_depth {
            let label = s.label_at(i);
            let image = t.forward(&label);
            for (m, _) in image.iter() {
                if s.index_of(m).is_none() {
                    return Err(Error::InvarianceViolation { label: label.to_string() });
                }
            }
        }
        Ok(Self::new(
            Node::Restrict { t: t.clone(), s: s.clone() },
            t.inner.band,
            t.inner.norm_hint,
        ))
    }

    /// Compression `P_S T|_S`, relabeled onto plain indices.
    pub fn compress(t: &Operator, s: &Subspace) -> Self {
        Self::new(
            Node::Compress { t: t.clone(), s: s.clone() },
            t.inner.band,
            t.inner.norm_hint,
        )
    }

    /// Fully custom lazy operator. `forward` and `adjoint` must satisfy the
    /// adjoint-consistency identity; `labels` enumerates the operator's space.
    pub fn custom(forward: ForwardFn, adjoint: ForwardFn, labels: LabelFn) -> Self {
        Self::new(Node::Custom { forward, adjoint, labels }, None, None)
    }

    pub fn norm_hint(&self) -> Option<f64> {
        self.inner.norm_hint
    }

    pub fn delta_hint(&self) -> Option<DeltaHint> {
        self.inner.delta_hint
    }

    pub fn band(&self) -> Option<u64> {
        self.inner.band
    }

    pub(crate) fn node(&self) -> &Node {
        &self.inner.node
    }

    /// Image of the basis vector `e_label`.
    pub fn forward(&self, label: &BasisLabel) -> SparseVector {
        match &self.inner.node {
            Node::Identity => SparseVector::basis(label.clone()),
            Node::Zero => SparseVector::zero(),
            Node::WeightedShift { weight } => {
                let w = weight(label.index);
                SparseVector::from_entries([(
                    BasisLabel::with_path(label.path.clone(), label.index + 1),
                    Scalar::new(w, 0.0),
                )])
            }
            Node::Diagonal { phase } => {
                SparseVector::from_entries([(label.clone(), phase(label.index))])
            }
            Node::Injection { map, .. } => SparseVector::basis(BasisLabel::with_path(
                label.path.clone(),
                map(label.index),
            )),
            Node::Cyclic { n } => {
                let idx = if label.index < *n { (label.index + 1) % n } else { label.index };
                SparseVector::basis(BasisLabel::with_path(label.path.clone(), idx))
            }
            Node::BlockUpper { v, e, u, s } => {
                if let Some(sub) = label.strip_prefix("1") {
                    v.forward(&sub).map_labels(|l| l.prefixed("1"))
                } else if let Some(sub) = label.strip_prefix("2") {
                    let top = e.forward(&sub).scale(Scalar::new(*s, 0.0)).map_labels(|l| l.prefixed("1"));
                    let bot = u.forward(&sub).map_labels(|l| l.prefixed("2"));
                    top.plus(&bot)
                } else {
                    SparseVector::zero()
                }
            }
            Node::Oplus { parts } => match split_summand(label, parts.len()) {
                Some((i, sub)) => {
                    let tag = (i + 1).to_string();
                    parts[i].forward(&sub).map_labels(|l| l.prefixed(&tag))
                }
                None => SparseVector::zero(),
            },
            Node::OplusGen { part } => match split_summand_unbounded(label) {
                Some((i, sub)) => {
                    let tag = (i + 1).to_string();
                    part(i).forward(&sub).map_labels(|l| l.prefixed(&tag))
                }
                None => SparseVector::zero(),
            },
            Node::Compose { a, b } => a.apply(&b.forward(label)),
            Node::AddScale { a, x, b, y } => {
                x.forward(label).scale(*a).plus(&y.forward(label).scale(*b))
            }
            Node::Adjoint { t } => t.adjoint_forward(label),
            Node::Restrict { t, s } => {
                let src = s.label_at(label.index as usize);
                t.forward(&src).filter_map_labels(|m| {
                    s.index_of(m).map(|i| BasisLabel::plain(i as u128))
                })
            }
            Node::Compress { t, s } => {
                let src = s.label_at(label.index as usize);
                t.forward(&src).filter_map_labels(|m| {
                    s.index_of(m).map(|i| BasisLabel::plain(i as u128))
                })
            }
            Node::Custom { forward, .. } => forward(label),
        }
    }

    /// Image of `e_label` under the adjoint.
    pub fn adjoint_forward(&self, label: &BasisLabel) -> SparseVector {
        match &self.inner.node {
            Node::Identity => SparseVector::basis(label.clone()),
            Node::Zero => SparseVector::zero(),
            Node::WeightedShift { weight } => {
                if label.index == 0 {
                    SparseVector::zero()
                } else {
                    let w = weight(label.index - 1);
                    SparseVector::from_entries([(
                        BasisLabel::with_path(label.path.clone(), label.index - 1),
                        Scalar::new(w, 0.0),
                    )])
                }
            }
            Node::Diagonal { phase } => {
                SparseVector::from_entries([(label.clone(), phase(label.index).conj())])
            }
            Node::Injection { inv, .. } => match inv(label.index) {
                Some(k) => SparseVector::basis(BasisLabel::with_path(label.path.clone(), k)),
                None => SparseVector::zero(),
            },
            Node::Cyclic { n } => {
                let idx = if label.index < *n { (label.index + n - 1) % n } else { label.index };
                SparseVector::basis(BasisLabel::with_path(label.path.clone(), idx))
            }
            Node::BlockUpper { v, e, u, s } => {
                // T* = [V* 0; sE* U*].
                if let Some(sub) = label.strip_prefix("1") {
                    let top = v.adjoint_forward(&sub).map_labels(|l| l.prefixed("1"));
                    let bot = e
                        .adjoint_forward(&sub)
                        .scale(Scalar::new(*s, 0.0))
                        .map_labels(|l| l.prefixed("2"));
                    top.plus(&bot)
                } else if let Some(sub) = label.strip_prefix("2") {
                    u.adjoint_forward(&sub).map_labels(|l| l.prefixed("2"))
                } else {
                    SparseVector::zero()
                }
            }
            Node::Oplus { parts } => match split_summand(label, parts.len()) {
                Some((i, sub)) => {
                    let tag = (i + 1).to_string();
                    parts[i].adjoint_forward(&sub).map_labels(|l| l.prefixed(&tag))
                }
                None => SparseVector::zero(),
            },
            Node::OplusGen { part } => match split_summand_unbounded(label) {
                Some((i, sub)) => {
                    let tag = (i + 1).to_string();
                    part(i).adjoint_forward(&sub).map_labels(|l| l.prefixed(&tag))
                }
                None => SparseVector::zero(),
            },
            Node::Compose { a, b } => {
                // (AB)* = B*A*.
                b.apply_adjoint(&a.adjoint_forward(label))
            }
            Node::AddScale { a, x, b, y } => x
                .adjoint_forward(label)
                .scale(a.conj())
                .plus(&y.adjoint_forward(label).scale(b.conj())),
            Node::Adjoint { t } => t.forward(label),
            Node::Restrict { t, s } | Node::Compress { t, s } => {
                // (T|_S)* = P_S T*|_S; the adjoint of a compression is the
                // compression of the adjoint.
                let src = s.label_at(label.index as usize);
                t.adjoint_forward(&src).filter_map_labels(|m| {
                    s.index_of(m).map(|i| BasisLabel::plain(i as u128))
                })
            }
            Node::Custom { adjoint, .. } => adjoint(label),
        }
    }

    /// Linear extension of `forward` to finitely supported vectors.
    pub fn apply(&self, v: &SparseVector) -> SparseVector {
        let mut acc = SparseVector::zero();
        for (label, amp) in v.iter() {
            acc = acc.add_scaled(*amp, &self.forward(label));
        }
        acc
    }

    /// Linear extension of `adjoint_forward`.
    pub fn apply_adjoint(&self, v: &SparseVector) -> SparseVector {
        let mut acc = SparseVector::zero();
        for (label, amp) in v.iter() {
            acc = acc.add_scaled(*amp, &self.adjoint_forward(label));
        }
        acc
    }

    /// Fixed enumeration of the operator's label space.
    pub fn label_at(&self, i: usize) -> BasisLabel {
        match &self.inner.node {
            Node::Identity
            | Node::Zero
            | Node::WeightedShift { .. }
            | Node::Diagonal { .. }
            | Node::Injection { .. }
            | Node::Cyclic { .. } => BasisLabel::plain(i as u128),
            Node::BlockUpper { v, u, .. } => {
                if i % 2 == 0 {
                    v.label_at(i / 2).prefixed("1")
                } else {
                    u.label_at(i / 2).prefixed("2")
                }
            }
            Node::Oplus { parts } => {
                let k = parts.len();
                let part = i % k;
                let tag = (part + 1).to_string();
                parts[part].label_at(i / k).prefixed(&tag)
            }
            Node::OplusGen { part } => {
                // Cantor diagonal enumeration over (summand, inner index).
                let (p, j) = cantor_unpair(i);
                let tag = (p + 1).to_string();
                part(p).label_at(j).prefixed(&tag)
            }
            Node::Compose { a, .. } => a.label_at(i),
            Node::AddScale { x, .. } => x.label_at(i),
            Node::Adjoint { t } => t.label_at(i),
            Node::Restrict { .. } | Node::Compress { .. } => BasisLabel::plain(i as u128),
            Node::Custom { labels, .. } => labels(i),
        }
    }

    /// Position of `label` in this operator's enumeration, scanning up to
    /// `cap` entries.
    pub fn space_index_of(&self, label: &BasisLabel, cap: usize) -> Option<usize> {
        (0..cap).find(|&i| &self.label_at(i) == label)
    }

    /// Dense `n×n` principal block; entry `(i, j) = <T e_j, e_i>` in the
    /// space enumeration.
    pub fn principal_block(&self, n: usize) -> DMatrix<Scalar> {
        let labels: Vec<BasisLabel> = (0..n).map(|i| self.label_at(i)).collect();
        let mut m = DMatrix::<Scalar>::zeros(n, n);
        for (j, lj) in labels.iter().enumerate() {
            let col = self.forward(lj);
            for (i, li) in labels.iter().enumerate() {
                m[(i, j)] = col.entry(li);
            }
        }
        m
    }

    pub fn set_delta_hint(&mut self, hint: DeltaHint) {
        let inner = self.inner.clone();
        self.inner = Arc::new(OpInner {
            node: clone_node(&inner.node),
            band: inner.band,
            norm_hint: inner.norm_hint,
            delta_hint: Some(hint),
        });
    }

    pub fn with_delta_hint(mut self, hint: DeltaHint) -> Self {
        self.set_delta_hint(hint);
        self
    }

    pub fn set_norm_hint(&mut self, hint: f64) {
        let inner = self.inner.clone();
        self.inner = Arc::new(OpInner {
            node: clone_node(&inner.node),
            band: inner.band,
            norm_hint: Some(hint),
            delta_hint: inner.delta_hint,
        });
    }

    pub fn with_norm_hint(mut self, hint: f64) -> Self {
        self.set_norm_hint(hint);
        self
    }
}

fn clone_node(node: &Node) -> Node {
    match node {
        Node::Identity => Node::Identity,
        Node::Zero => Node::Zero,
        Node::WeightedShift { weight } => Node::WeightedShift { weight: weight.clone() },
        Node::Diagonal { phase } => Node::Diagonal { phase: phase.clone() },
        Node::Injection { map, inv } => Node::Injection { map: map.clone(), inv: inv.clone() },
        Node::Cyclic { n } => Node::Cyclic { n: *n },
        Node::BlockUpper { v, e, u, s } => Node::BlockUpper {
            v: v.clone(),
            e: e.clone(),
            u: u.clone(),
            s: *s,
        },
        Node::Oplus { parts } => Node::Oplus { parts: parts.clone() },
        Node::OplusGen { part } => Node::OplusGen { part: part.clone() },
        Node::Compose { a, b } => Node::Compose { a: a.clone(), b: b.clone() },
        Node::AddScale { a, x, b, y } => Node::AddScale {
            a: *a,
            x: x.clone(),
            b: *b,
            y: y.clone(),
        },
        Node::Adjoint { t } => Node::Adjoint { t: t.clone() },
        Node::Restrict { t, s } => Node::Restrict { t: t.clone(), s: s.clone() },
        Node::Compress { t, s } => Node::Compress { t: t.clone(), s: s.clone() },
        Node::Custom { forward, adjoint, labels } => Node::Custom {
            forward: forward.clone(),
            adjoint: adjoint.clone(),
            labels: labels.clone(),
        },
    }
}

fn split_summand(label: &BasisLabel, k: usize) -> Option<(usize, BasisLabel)> {
    let head = label.head_tag()?;
    let i: usize = head.parse().ok()?;
    if i == 0 || i > k {
        return None;
    }
    Some((
        i - 1,
        BasisLabel::with_path(label.path[1..].to_vec(), label.index),
    ))
}

fn split_summand_unbounded(label: &BasisLabel) -> Option<(usize, BasisLabel)> {
    let head = label.head_tag()?;
    let i: usize = head.parse().ok()?;
    if i == 0 {
        return None;
    }
    Some((
        i - 1,
        BasisLabel::with_path(label.path[1..].to_vec(), label.index),
    ))
}

fn cantor_unpair(i: usize) -> (usize, usize) {
    // i = t(t+1)/2 + d with 0 <= d <= t; summand d, inner index t - d.
    let mut t = 0usize;
    let mut base = 0usize;
    while base + t + 1 <= i {
        base += t + 1;
        t += 1;
    }
    let d = i - base;
    (d, t - d)
}

/// A subspace spanned by basis labels, given by a membership predicate, an
/// order-respecting enumeration, and its inverse.
#[derive(Clone)]
pub struct Subspace {
    contains: Arc<dyn Fn(&BasisLabel) -> bool + Send + Sync>,
    label_at: LabelFn,
    index_of: Arc<dyn Fn(&BasisLabel) -> Option<usize> + Send + Sync>,
}

impl Subspace {
    pub fn new(
        contains: Arc<dyn Fn(&BasisLabel) -> bool + Send + Sync>,
        label_at: LabelFn,
        index_of: Arc<dyn Fn(&BasisLabel) -> Option<usize> + Send + Sync>,
    ) -> Self {
        Subspace { contains, label_at, index_of }
    }

    pub fn contains(&self, label: &BasisLabel) -> bool {
        (self.contains)(label)
    }

    pub fn label_at(&self, i: usize) -> BasisLabel {
        (self.label_at)(i)
    }

    pub fn index_of(&self, label: &BasisLabel) -> Option<usize> {
        if (self.contains)(label) {
            (self.index_of)(label)
        } else {
            None
        }
    }

    /// All plain labels (the full space of a leaf operator).
    pub fn all_plain() -> Self {
        Subspace::new(
            Arc::new(|l: &BasisLabel| l.path.is_empty()),
            Arc::new(|i| BasisLabel::plain(i as u128)),
            Arc::new(|l: &BasisLabel| {
                if l.path.is_empty() {
                    usize::try_from(l.index).ok()
                } else {
                    None
                }
            }),
        )
    }

    /// Span of the plain labels `e_0 .. e_{n-1}`.
    pub fn first_indices(n: u128) -> Self {
        Subspace::new(
            Arc::new(move |l: &BasisLabel| l.path.is_empty() && l.index < n),
            Arc::new(|i| BasisLabel::plain(i as u128)),
            Arc::new(move |l: &BasisLabel| {
                if l.path.is_empty() && l.index < n {
                    usize::try_from(l.index).ok()
                } else {
                    None
                }
            }),
        )
    }

    /// One component of a block decomposition: labels `(tag, k)` with a plain
    /// tail, enumerated by `k`.
    pub fn component(tag: &str) -> Self {
        let t1 = tag.to_string();
        let t2 = tag.to_string();
        let t3 = tag.to_string();
        Subspace::new(
            Arc::new(move |l: &BasisLabel| l.path.len() == 1 && l.path[0] == t1),
            Arc::new(move |i| BasisLabel::with_path(vec![t2.clone()], i as u128)),
            Arc::new(move |l: &BasisLabel| {
                if l.path.len() == 1 && l.path[0] == t3 {
                    usize::try_from(l.index).ok()
                } else {
                    None
                }
            }),
        )
    }

    /// First block component plus the even-indexed part of the second:
    /// `{("1", k)} ∪ {("2", 2j)}`, enumerated by interleaving.
    pub fn h1_plus_even_h2() -> Self {
        Subspace::new(
            Arc::new(|l: &BasisLabel| {
                l.path.len() == 1
                    && ((l.path[0] == "1") || (l.path[0] == "2" && l.index % 2 == 0))
            }),
            Arc::new(|i| {
                let k = (i / 2) as u128;
                if i % 2 == 0 {
                    BasisLabel::with_path(vec!["1".into()], k)
                } else {
                    BasisLabel::with_path(vec!["2".into()], 2 * k)
                }
            }),
            Arc::new(|l: &BasisLabel| {
                if l.path.len() != 1 {
                    return None;
                }
                if l.path[0] == "1" {
                    usize::try_from(2 * l.index).ok()
                } else if l.path[0] == "2" && l.index % 2 == 0 {
                    usize::try_from(l.index + 1).ok()
                } else {
                    None
                }
            }),
        )
    }
}

/// Max adjoint-consistency defect
/// `|<T e_m, e_l> - conj(<T* e_l, e_m>)|` over the first `depth` label pairs.
pub fn adjoint_defect(t: &Operator, depth: usize) -> f64 {
    let labels: Vec<BasisLabel> = (0..depth).map(|i| t.label_at(i)).collect();
    let mut worst = 0.0f64;
    for lm in &labels {
        let fwd = t.forward(lm);
        for ll in &labels {
            let a = fwd.entry(ll);
            let b = t.adjoint_forward(ll).entry(lm).conj();
            worst = worst.max((a - b).norm());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: u128) -> SparseVector {
        SparseVector::basis(BasisLabel::plain(i))
    }

    fn one() -> Scalar {
        Scalar::new(1.0, 0.0)
    }

    #[test]
    fn identity_and_shift_basics() {
        assert_eq!(Operator::identity().apply(&e(5)), e(5));
        assert_eq!(Operator::shift().apply(&e(0)), e(1));
    }

    #[test]
    fn adjoint_is_involutive_and_kills_bottom() {
        let s = Operator::shift();
        assert!(s.adjoint().forward(&BasisLabel::plain(0)).is_zero());
        let saa = s.adjoint().adjoint();
        for i in 0..8 {
            assert_eq!(saa.forward(&BasisLabel::plain(i)), s.forward(&BasisLabel::plain(i)));
        }
    }

    #[test]
    fn diagonal_adjoint_conjugates() {
        let z = Scalar::new(0.0, 1.0);
        let d = Operator::diagonal_unitary(Arc::new(move |_| z));
        let got = d.adjoint().forward(&BasisLabel::plain(3));
        assert!((got.entry(&BasisLabel::plain(3)) - z.conj()).norm() < 1e-15);
    }

    #[test]
    fn compose_identity_is_noop() {
        let s = Operator::shift();
        let c = Operator::compose(&Operator::identity(), &s);
        for i in 0..8 {
            assert_eq!(c.forward(&BasisLabel::plain(i)), s.forward(&BasisLabel::plain(i)));
        }
    }

    #[test]
    fn isometry_star_times_self_is_identity() {
        let s = Operator::shift();
        let sts = Operator::compose(&s.adjoint(), &s);
        for i in 0..8 {
            assert_eq!(sts.apply(&e(i)), e(i));
        }
    }

    #[test]
    fn add_scale_cancellation() {
        let s = Operator::shift();
        let z = Operator::add_scale(one(), &s, -one(), &s);
        for i in 0..8 {
            assert!(z.forward(&BasisLabel::plain(i)).is_zero());
        }
    }

    #[test]
    fn oplus_of_identities_is_identity_on_doubled_space() {
        let t = Operator::oplus(vec![Operator::identity(), Operator::identity()]);
        for i in 0..16 {
            let l = t.label_at(i);
            assert_eq!(t.forward(&l), SparseVector::basis(l.clone()));
        }
    }

    #[test]
    fn block_upper_sigma_zero_decouples() {
        let v = Operator::injection(Arc::new(|k| 2 * k), Arc::new(|m| (m % 2 == 0).then(|| m / 2)));
        let ee = Operator::injection(Arc::new(|k| 2 * k + 1), Arc::new(|m| (m % 2 == 1).then(|| (m - 1) / 2)));
        let t = Operator::block_upper(&v, &ee, &Operator::identity(), 0.0);
        let d = Operator::oplus(vec![v, Operator::identity()]);
        for i in 0..32 {
            let l = t.label_at(i);
            assert_eq!(t.forward(&l), d.forward(&l));
            assert_eq!(t.adjoint_forward(&l), d.adjoint_forward(&l));
        }
    }

    #[test]
    fn restrict_shift_span_violates_invariance() {
        let res = Operator::restrict(&Operator::shift(), &Subspace::first_indices(1), 1);
        match res {
            Err(Error::InvarianceViolation { label }) => assert_eq!(label, "e0"),
            other => panic!("expected invariance violation, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn compress_full_space_is_identity_action() {
        let s = Operator::shift();
        let c = Operator::compress(&s, &Subspace::all_plain());
        for i in 0..8 {
            assert_eq!(c.forward(&BasisLabel::plain(i)), s.forward(&BasisLabel::plain(i)));
        }
    }

    #[test]
    fn cyclic_compression_counterexample() {
        // 3-cycle compressed to the first two coordinates.
        let a = Operator::cyclic(3);
        let b = Operator::compress(&a, &Subspace::first_indices(2));
        assert_eq!(b.apply(&e(0)), e(1));
        assert!(b.apply(&e(1)).is_zero());
        // B*B = diag(1, 0), BB* = diag(0, 1).
        let bsb = Operator::compose(&b.adjoint(), &b);
        let bbs = Operator::compose(&b, &b.adjoint());
        assert_eq!(bsb.apply(&e(0)), e(0));
        assert!(bsb.apply(&e(1)).is_zero());
        assert!(bbs.apply(&e(0)).is_zero());
        assert_eq!(bbs.apply(&e(1)), e(1));
    }

    #[test]
    fn principal_block_identity_and_shift() {
        let id3 = Operator::identity().principal_block(3);
        assert_eq!(id3, DMatrix::identity(3, 3));
        let s3 = Operator::shift().principal_block(3);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j + 1 { 1.0 } else { 0.0 };
                assert!((s3[(i, j)] - Scalar::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn adjoint_consistency_over_builders() {
        let v = Operator::injection(Arc::new(|k| 2 * k), Arc::new(|m| (m % 2 == 0).then(|| m / 2)));
        let ee = Operator::injection(Arc::new(|k| 2 * k + 1), Arc::new(|m| (m % 2 == 1).then(|| (m - 1) / 2)));
        let ops = vec![
            Operator::shift(),
            Operator::weighted_shift(Arc::new(|n| 1.0 + 1.0 / (n as f64 + 1.0))),
            Operator::diagonal(Arc::new(|n| Scalar::new(0.0, 1.0).powu(n as u32 % 4))),
            Operator::block_upper(&v, &ee, &Operator::identity(), 2.0),
            Operator::oplus(vec![Operator::shift(), Operator::identity()]),
            Operator::compose(&Operator::shift(), &Operator::shift().adjoint()),
            Operator::add_scale(
                Scalar::new(0.5, 0.5),
                &Operator::shift(),
                Scalar::new(-1.0, 0.25),
                &Operator::identity(),
            ),
            Operator::cyclic(5),
        ];
        for op in &ops {
            assert!(adjoint_defect(op, 24) <= 1e-12);
        }
    }

    #[test]
    fn compose_associativity_on_basis() {
        let a = Operator::shift();
        let b = Operator::cyclic(4);
        let c = Operator::shift().adjoint();
        let lhs = Operator::compose(&Operator::compose(&a, &b), &c);
        let rhs = Operator::compose(&a, &Operator::compose(&b, &c));
        for i in 0..64 {
            let l = BasisLabel::plain(i);
            assert!(lhs.forward(&l).minus(&rhs.forward(&l)).norm() <= 1e-12);
        }
    }

    #[test]
    fn compress_adjoint_commutes() {
        let v = Operator::injection(Arc::new(|k| 2 * k), Arc::new(|m| (m % 2 == 0).then(|| m / 2)));
        let ee = Operator::injection(Arc::new(|k| 2 * k + 1), Arc::new(|m| (m % 2 == 1).then(|| (m - 1) / 2)));
        let t = Operator::block_upper(&v, &ee, &Operator::identity(), 1.5);
        let s = Subspace::h1_plus_even_h2();
        let lhs = Operator::compress(&t, &s).adjoint();
        let rhs = Operator::compress(&t.adjoint(), &s);
        for i in 0..64 {
            let l = BasisLabel::plain(i as u128);
            assert!(lhs.forward(&l).minus(&rhs.forward(&l)).norm() <= 1e-12);
        }
    }

    #[test]
    fn oplus_generator_matches_finite_prefix() {
        let gen = Operator::oplus_indexed(Arc::new(|_| Operator::identity()));
        for i in 0..32 {
            let l = gen.label_at(i);
            assert_eq!(gen.forward(&l), SparseVector::basis(l.clone()));
        }
    }

    #[test]
    fn cantor_unpair_enumerates_all_pairs_once() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..64 {
            assert!(seen.insert(cantor_unpair(i)));
        }
    }
}
