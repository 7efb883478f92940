use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::algebra::element::Flags;
use crate::error::invalid;
use crate::linalg::{eigh, svd, CMatrix, C64};
use crate::{Element, Error, Result, TracedAlgebra};

const IDEMPOTENCE_TOL: f64 = 1e-10;

/// Orthogonal projection stored through an orthonormal basis of its range in every block.
///
/// The matrix form is rebuilt from the basis, so eigenvalues are exactly 0 or 1
/// up to rounding, and `‖e² − e‖_∞` is re-verified at construction.
#[derive(Debug, Clone)]
pub struct Projection {
    element: Element,
    bases: Vec<Vec<Vec<C64>>>,
}

impl Projection {
    /// `bases[i]` holds orthonormal vectors of length `dim_i` spanning the range in block `i`.
    pub fn from_orthonormal(algebra: Arc<TracedAlgebra>, bases: Vec<Vec<Vec<C64>>>) -> Result<Self> {
        if bases.len() != algebra.num_blocks() {
            return Err(Error::ShapeMismatch(format!("expected {} bases, got {}", algebra.num_blocks(), bases.len())));
        }
        let mut blocks = Vec::with_capacity(bases.len());
        for (i, (basis, b)) in bases.iter().zip(algebra.blocks()).enumerate() {
            if basis.len() > b.dim || basis.iter().any(|v| v.len() != b.dim) {
                return Err(Error::ShapeMismatch(format!("basis of block {i} does not fit dimension {}", b.dim)));
            }
            blocks.push(CMatrix::projector_onto(b.dim, basis));
        }
        let element = Element::from_blocks(algebra, blocks)?;
        let defect = (&(&element * &element) - &element).max_abs_entry();
        if defect > IDEMPOTENCE_TOL {
            return Err(invalid!("basis is not orthonormal (‖e²−e‖ ≈ {defect:e})"));
        }
        let element = element.set_flags(Flags { selfadjoint: true, positive: true, projection: true });
        Ok(Self { element, bases })
    }

    /// Rounds the spectrum of a (numerically) selfadjoint idempotent to `{0, 1}`.
    pub fn from_element(e: &Element, tol: f64) -> Result<Self> {
        let checked = e.clone().with_flags(Flags { projection: true, ..Flags::default() }, tol)?;
        let bases = checked
            .blocks()
            .iter()
            .map(|m| {
                let eig = eigh(m);
                (0..m.dim()).filter(|&k| eig.values[k] > 0.5).map(|k| eig.vector(k)).collect()
            })
            .collect();
        Self::from_orthonormal(e.algebra().clone(), bases)
    }

    pub fn identity(algebra: &Arc<TracedAlgebra>) -> Self {
        let bases = algebra
            .blocks()
            .iter()
            .map(|b| {
                let id = CMatrix::identity(b.dim);
                (0..b.dim).map(|k| id.column(k)).collect()
            })
            .collect();
        Self::from_orthonormal(algebra.clone(), bases).expect("standard basis")
    }

    pub fn zero(algebra: &Arc<TracedAlgebra>) -> Self {
        let bases = algebra.blocks().iter().map(|_| Vec::new()).collect();
        Self::from_orthonormal(algebra.clone(), bases).expect("empty basis")
    }

    /// `χ_S(|x|)` where `S` is selected by `keep(σ)` on the singular values of each block.
    pub fn abs_spectral(x: &Element, keep: impl Fn(f64) -> bool) -> Self {
        let bases = x
            .blocks()
            .iter()
            .map(|m| {
                let s = svd(m);
                (0..m.dim()).filter(|&k| keep(s.values[k])).map(|k| s.right_vector(k)).collect()
            })
            .collect();
        Self::from_orthonormal(x.algebra().clone(), bases).expect("singular vectors are orthonormal")
    }

    pub fn as_element(&self) -> &Element {
        &self.element
    }

    pub fn into_element(self) -> Element {
        self.element
    }

    pub fn algebra(&self) -> &Arc<TracedAlgebra> {
        self.element.algebra()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.bases.iter().map(Vec::len).collect()
    }

    pub fn basis(&self, block: usize) -> &[Vec<C64>] {
        &self.bases[block]
    }

    /// `τ(e)`
    pub fn trace(&self) -> f64 {
        self.bases.iter().zip(self.algebra().blocks()).map(|(b, blk)| blk.weight * b.len() as f64).sum()
    }

    /// `τ(e⊥) = τ(1) − τ(e)`
    pub fn deficiency(&self) -> f64 {
        self.bases.iter().zip(self.algebra().blocks()).map(|(b, blk)| blk.weight * (blk.dim - b.len()) as f64).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.bases.iter().zip(self.algebra().blocks()).all(|(b, blk)| b.len() == blk.dim)
    }

    /// `e⊥ = 1 − e`
    pub fn complement(&self) -> Self {
        let bases = self
            .element
            .blocks()
            .iter()
            .map(|m| {
                let c = &CMatrix::identity(m.dim()) - m;
                let eig = eigh(&c);
                (0..m.dim()).filter(|&k| eig.values[k] > 0.5).map(|k| eig.vector(k)).collect()
            })
            .collect();
        Self::from_orthonormal(self.algebra().clone(), bases).expect("eigenvectors are orthonormal")
    }

    /// `e ∧ f`: projection onto `range(e) ∩ range(f)`, read off as the eigenvalue-2
    /// eigenspace of `e + f` with slack `tol`.
    pub fn meet(&self, other: &Self, tol: f64) -> Result<Self> {
        self.element.check_same_algebra(&other.element)?;
        let bases = self
            .element
            .blocks()
            .iter()
            .zip(other.element.blocks())
            .zip(self.bases.iter().zip(&other.bases))
            .map(|((a, b), (ba, bb))| {
                // Fast paths keep exact bases when one side is trivial.
                if ba.len() == a.dim() {
                    return bb.clone();
                }
                if bb.len() == b.dim() {
                    return ba.clone();
                }
                if ba.is_empty() || bb.is_empty() {
                    return Vec::new();
                }
                let eig = eigh(&(a + b));
                (0..a.dim()).filter(|&k| eig.values[k] >= 2.0 - tol).map(|k| eig.vector(k)).collect()
            })
            .collect();
        Self::from_orthonormal(self.algebra().clone(), bases)
    }
}
