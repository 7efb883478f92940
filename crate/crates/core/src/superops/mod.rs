//! Structured linear maps on a traced algebra.
//!
//! Maps are trees of structural nodes (conjugations, pinchings, block-diagonal
//! expectations, convex combinations, compositions, powers) with an escape hatch
//! for explicit matrices on the vectorized algebra. Structural trees are positive,
//! selfadjoint and contract both the trace norm and the operator norm by construction.

mod ds;

pub use ds::{
    audit_submajorization, check_positivity, preserves_fava, verify_ds, verify_ds_with, DsCertificate, DsMethod,
    DsRequest, DEFAULT_TRIALS,
};

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::Flags;
use crate::error::invalid;
use crate::linalg::{CMatrix, C64};
use crate::{Element, Error, Projection, Result, TracedAlgebra};

const STRUCTURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub enum Node {
    /// `x ↦ u x u*` for a verified unitary `u`.
    UnitaryConjugation(Element),
    /// `x ↦ Σ p_i x p_i` for pairwise orthogonal projections with `Σ p_i = 1`.
    Pinching(Vec<Projection>),
    /// In every block, keeps entry `(j, k)` iff `labels[block][j] == labels[block][k]`.
    BlockDiagonalExpectation(Vec<Vec<usize>>),
    /// `Σ w_i A_i` with `w_i ≥ 0` and `Σ w_i ≤ 1`.
    ConvexCombination(Vec<(f64, SuperOperator)>),
    /// `A_n ∘ … ∘ A_1`: the first entry is applied first.
    Composition(Vec<SuperOperator>),
    /// A `D × D` matrix acting on the row-major vectorization, `D = Σ dim_i²`.
    Explicit(CMatrix),
    Power(Box<SuperOperator>, u32),
}

#[derive(Debug, Clone)]
pub struct SuperOperator {
    algebra: Arc<TracedAlgebra>,
    node: Node,
}

impl SuperOperator {
    pub fn identity(algebra: &Arc<TracedAlgebra>) -> Self {
        Self { algebra: algebra.clone(), node: Node::Composition(Vec::new()) }
    }

    pub fn unitary_conjugation(u: Element) -> Result<Self> {
        let defect = (&(&u * &u.adjoint()) - &Element::identity(u.algebra())).max_abs_entry();
        if defect > STRUCTURE_TOL {
            return Err(invalid!("conjugating element is not unitary (‖uu*−1‖ ≈ {defect:e})"));
        }
        Ok(Self { algebra: u.algebra().clone(), node: Node::UnitaryConjugation(u) })
    }

    pub fn pinching(projections: Vec<Projection>) -> Result<Self> {
        let first = projections.first().ok_or_else(|| invalid!("pinching needs at least one projection"))?;
        let algebra = first.algebra().clone();
        let mut sum = Element::zero(&algebra);
        for (i, p) in projections.iter().enumerate() {
            p.as_element().check_same_algebra(&sum)?;
            for q in &projections[i + 1..] {
                let overlap = (p.as_element() * q.as_element()).max_abs_entry();
                if overlap > STRUCTURE_TOL {
                    return Err(invalid!("pinching projections are not orthogonal (‖pq‖ ≈ {overlap:e})"));
                }
            }
            sum = &sum + p.as_element();
        }
        let defect = (&sum - &Element::identity(&algebra)).max_abs_entry();
        if defect > STRUCTURE_TOL {
            return Err(invalid!("pinching projections do not sum to 1 (defect {defect:e})"));
        }
        Ok(Self { algebra, node: Node::Pinching(projections) })
    }

    /// Pinching onto the diagonal of every block.
    pub fn diagonal_pinching(algebra: &Arc<TracedAlgebra>) -> Self {
        let labels = algebra.blocks().iter().map(|b| (0..b.dim).collect()).collect();
        Self { algebra: algebra.clone(), node: Node::BlockDiagonalExpectation(labels) }
    }

    pub fn block_diagonal_expectation(algebra: &Arc<TracedAlgebra>, labels: Vec<Vec<usize>>) -> Result<Self> {
        if labels.len() != algebra.num_blocks() || labels.iter().zip(algebra.blocks()).any(|(l, b)| l.len() != b.dim) {
            return Err(Error::ShapeMismatch("partition labels must match the block dimensions".into()));
        }
        Ok(Self { algebra: algebra.clone(), node: Node::BlockDiagonalExpectation(labels) })
    }

    pub fn convex_combination(terms: Vec<(f64, SuperOperator)>) -> Result<Self> {
        let first = terms.first().ok_or_else(|| invalid!("convex combination needs at least one term"))?;
        let algebra = first.1.algebra.clone();
        let mut total = 0.0;
        for (w, op) in &terms {
            if !(*w >= 0.0 && w.is_finite()) {
                return Err(invalid!("convex weights must be nonnegative, got {w}"));
            }
            op.check_algebra(&algebra)?;
            total += w;
        }
        if total > 1.0 + 1e-12 {
            return Err(invalid!("convex weights sum to {total} > 1"));
        }
        Ok(Self { algebra, node: Node::ConvexCombination(terms) })
    }

    /// `ops[n−1] ∘ … ∘ ops[0]`.
    pub fn composition(ops: Vec<SuperOperator>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| invalid!("composition needs at least one operator"))?;
        let algebra = first.algebra.clone();
        for op in &ops {
            op.check_algebra(&algebra)?;
        }
        Ok(Self { algebra, node: Node::Composition(ops) })
    }

    pub fn explicit(algebra: &Arc<TracedAlgebra>, matrix: CMatrix) -> Result<Self> {
        let d = algebra.vector_len();
        if matrix.dim() != d {
            return Err(Error::ShapeMismatch(format!("explicit map must be {d}×{d}, got {0}×{0}", matrix.dim())));
        }
        if !matrix.is_finite() {
            return Err(invalid!("explicit map has non-finite entries"));
        }
        Ok(Self { algebra: algebra.clone(), node: Node::Explicit(matrix) })
    }

    /// The explicit matrix of any linear map `f`, built column by column on matrix units.
    pub fn from_linear_fn(algebra: &Arc<TracedAlgebra>, f: impl Fn(&Element) -> Element) -> Result<Self> {
        let d = algebra.vector_len();
        let mut m = CMatrix::zeros(d);
        let mut unit = vec![C64::new(0.0, 0.0); d];
        for j in 0..d {
            unit[j] = C64::new(1.0, 0.0);
            let image = f(&Element::from_vector(algebra, &unit)?).vectorize();
            unit[j] = C64::new(0.0, 0.0);
            if image.len() != d {
                return Err(Error::ShapeMismatch("linear map changes the algebra".into()));
            }
            for (i, v) in image.into_iter().enumerate() {
                m.as_mut_slice()[i * d + j] = v;
            }
        }
        Self::explicit(algebra, m)
    }

    pub fn power(base: SuperOperator, exponent: u32) -> Self {
        Self { algebra: base.algebra.clone(), node: Node::Power(Box::new(base), exponent) }
    }

    pub fn algebra(&self) -> &Arc<TracedAlgebra> {
        &self.algebra
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    fn check_algebra(&self, algebra: &Arc<TracedAlgebra>) -> Result<()> {
        if Arc::ptr_eq(&self.algebra, algebra) || *self.algebra == **algebra {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    /// True when the tree has no explicit matrices, so that positivity,
    /// selfadjointness and the contraction bounds hold by construction.
    pub fn is_structural(&self) -> bool {
        match &self.node {
            Node::Explicit(_) => false,
            Node::ConvexCombination(terms) => terms.iter().all(|(_, op)| op.is_structural()),
            Node::Composition(ops) => ops.iter().all(SuperOperator::is_structural),
            Node::Power(base, _) => base.is_structural(),
            _ => true,
        }
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        self.check_algebra(x.algebra())?;
        let y = self.apply_unchecked(x);
        // Positive selfadjoint structural maps keep x* = x; carry only that flag.
        let flags = Flags { selfadjoint: x.flags().selfadjoint && self.is_structural(), ..Flags::default() };
        Ok(y.set_flags(flags))
    }

    fn apply_unchecked(&self, x: &Element) -> Element {
        match &self.node {
            Node::UnitaryConjugation(u) => x.zip_blocks(u, |m, ub| m.conjugate_by(ub)),
            Node::Pinching(ps) => {
                let mut acc = Element::zero(x.algebra());
                for p in ps {
                    let pe = p.as_element();
                    acc = &acc + &(&(pe * x) * pe);
                }
                acc
            }
            Node::BlockDiagonalExpectation(labels) => {
                let blocks = x
                    .blocks()
                    .iter()
                    .zip(labels)
                    .map(|(m, l)| {
                        CMatrix::from_fn(m.dim(), |j, k| if l[j] == l[k] { m[(j, k)] } else { C64::new(0.0, 0.0) })
                    })
                    .collect();
                Element::from_blocks_unchecked(x.algebra().clone(), blocks)
            }
            Node::ConvexCombination(terms) => {
                let mut acc = Element::zero(x.algebra());
                for (w, op) in terms {
                    acc.axpy(C64::new(*w, 0.0), &op.apply_unchecked(x));
                }
                acc
            }
            Node::Composition(ops) => {
                let mut y = x.clone();
                for op in ops {
                    y = op.apply_unchecked(&y);
                }
                y
            }
            Node::Explicit(m) => {
                let v = x.vectorize();
                let d = v.len();
                let data = m.as_slice();
                let out: Vec<C64> =
                    (0..d).map(|i| data[i * d..(i + 1) * d].iter().zip(&v).map(|(a, b)| a * b).sum()).collect();
                Element::from_vector(x.algebra(), &out).expect("explicit map preserves the vector length")
            }
            Node::Power(base, k) => {
                let mut y = x.clone();
                for _ in 0..*k {
                    y = base.apply_unchecked(&y);
                }
                y
            }
        }
    }

    /// The adjoint for the trace pairing: `τ(A(x)* y) = τ(x* A†(y))`.
    pub fn adjoint_wrt_trace(&self) -> Self {
        let node = match &self.node {
            Node::UnitaryConjugation(u) => Node::UnitaryConjugation(u.adjoint()),
            Node::Pinching(_) | Node::BlockDiagonalExpectation(_) => self.node.clone(),
            Node::ConvexCombination(terms) => {
                Node::ConvexCombination(terms.iter().map(|(w, op)| (*w, op.adjoint_wrt_trace())).collect())
            }
            Node::Composition(ops) => {
                Node::Composition(ops.iter().rev().map(SuperOperator::adjoint_wrt_trace).collect())
            }
            Node::Explicit(m) => {
                // With the pairing ⟨a, b⟩ = a^H W b, the adjoint of M is W⁻¹ M^H W.
                let weights = self.entry_weights();
                let mh = m.adjoint();
                Node::Explicit(CMatrix::from_fn(m.dim(), |i, j| mh[(i, j)] * (weights[j] / weights[i])))
            }
            Node::Power(base, k) => Node::Power(Box::new(base.adjoint_wrt_trace()), *k),
        };
        Self { algebra: self.algebra.clone(), node }
    }

    /// Block weight of every coordinate of the vectorization.
    fn entry_weights(&self) -> Vec<f64> {
        self.algebra.blocks().iter().flat_map(|b| core::iter::repeat_n(b.weight, b.dim * b.dim)).collect()
    }

    /// Whether `x ↦ A(x)` is a unitary conjugation, and if so by which unitary.
    pub fn as_conjugation(&self) -> Option<&Element> {
        match &self.node {
            Node::UnitaryConjugation(u) => Some(u),
            _ => None,
        }
    }
}
