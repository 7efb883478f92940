use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use crate::error::invalid;
use crate::linalg::{eigh, svd, CMatrix, C64, ONE};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub dim: usize,
    pub weight: f64,
}

/// `M_{d_1} ⊕ … ⊕ M_{d_k}` with trace `τ(x) = Σ_i w_i tr(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedAlgebra {
    blocks: Vec<Block>,
    total_trace: f64,
}

impl TracedAlgebra {
    pub fn new(blocks: &[(usize, f64)]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(invalid!("an algebra needs at least one block"));
        }
        let mut out = Vec::with_capacity(blocks.len());
        for (i, &(dim, weight)) in blocks.iter().enumerate() {
            if dim == 0 {
                return Err(invalid!("block {i} has dimension 0"));
            }
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(invalid!("block {i} has non-positive or non-finite weight {weight}"));
            }
            out.push(Block { dim, weight });
        }
        let total_trace = out.iter().map(|b| b.weight * b.dim as f64).sum();
        Ok(Self { blocks: out, total_trace })
    }

    /// A single full matrix block `M_n` with unit weight.
    pub fn matrix(n: usize) -> Result<Self> {
        Self::new(&[(n, 1.0)])
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// `τ(1)`
    pub fn total_trace(&self) -> f64 {
        self.total_trace
    }

    /// Length of the vectorization `Σ d_i²`.
    pub fn vector_len(&self) -> usize {
        self.blocks.iter().map(|b| b.dim * b.dim).sum()
    }
}

/// Structural properties that have been verified for an element.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Flags {
    pub selfadjoint: bool,
    pub positive: bool,
    pub projection: bool,
}

/// Block-diagonal element of a [`TracedAlgebra`].
#[derive(Debug, Clone)]
pub struct Element {
    algebra: Arc<TracedAlgebra>,
    blocks: Vec<CMatrix>,
    flags: Flags,
}

impl Element {
    pub fn from_blocks(algebra: Arc<TracedAlgebra>, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} blocks, got {}",
                algebra.num_blocks(),
                blocks.len()
            )));
        }
        for (i, (m, b)) in blocks.iter().zip(algebra.blocks()).enumerate() {
            if m.dim() != b.dim {
                return Err(Error::ShapeMismatch(format!("block {i}: expected dim {}, got {}", b.dim, m.dim())));
            }
            if !m.is_finite() {
                return Err(invalid!("block {i} has non-finite entries"));
            }
        }
        Ok(Self { algebra, blocks, flags: Flags::default() })
    }

    pub(crate) fn from_blocks_unchecked(algebra: Arc<TracedAlgebra>, blocks: Vec<CMatrix>) -> Self {
        debug_assert_eq!(blocks.len(), algebra.num_blocks());
        Self { algebra, blocks, flags: Flags::default() }
    }

    pub fn zero(algebra: &Arc<TracedAlgebra>) -> Self {
        let blocks = algebra.blocks().iter().map(|b| CMatrix::zeros(b.dim)).collect();
        Self::from_blocks_unchecked(algebra.clone(), blocks)
    }

    pub fn identity(algebra: &Arc<TracedAlgebra>) -> Self {
        Self::scalar(algebra, ONE)
    }

    pub fn scalar(algebra: &Arc<TracedAlgebra>, c: C64) -> Self {
        let blocks = algebra.blocks().iter().map(|b| CMatrix::identity(b.dim).scale(c)).collect();
        Self::from_blocks_unchecked(algebra.clone(), blocks)
    }

    /// Block-diagonal element whose blocks are the given real diagonal matrices.
    pub fn diagonal(algebra: &Arc<TracedAlgebra>, diagonals: &[&[f64]]) -> Result<Self> {
        let blocks = diagonals.iter().map(|d| CMatrix::from_real_diag(d)).collect();
        Self::from_blocks(algebra.clone(), blocks)
    }

    pub fn algebra(&self) -> &Arc<TracedAlgebra> {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &CMatrix {
        &self.blocks[i]
    }

    pub fn into_blocks(self) -> Vec<CMatrix> {
        self.blocks
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn same_algebra(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra == other.algebra
    }

    pub fn check_same_algebra(&self, other: &Self) -> Result<()> {
        if self.same_algebra(other) {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    pub(crate) fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        Self::from_blocks_unchecked(self.algebra.clone(), self.blocks.iter().map(f).collect())
    }

    pub(crate) fn zip_blocks(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Self {
        assert!(self.same_algebra(other), "elements belong to different algebras");
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect();
        Self::from_blocks_unchecked(self.algebra.clone(), blocks)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.map_blocks(CMatrix::adjoint);
        out.flags = self.flags;
        out
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map_blocks(|m| m.scale(c))
    }

    pub fn scale_real(&self, c: f64) -> Self {
        let mut out = self.map_blocks(|m| m.scale_real(c));
        out.flags.selfadjoint = self.flags.selfadjoint;
        out.flags.positive = self.flags.positive && c >= 0.0;
        out
    }

    /// `self += c · other`
    pub fn axpy(&mut self, c: C64, other: &Self) {
        assert!(self.same_algebra(other), "elements belong to different algebras");
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.axpy(c, b);
        }
        self.flags = Flags::default();
    }

    /// `τ(x)`
    pub fn trace(&self) -> C64 {
        self.blocks.iter().zip(self.algebra.blocks()).map(|(m, b)| m.trace() * b.weight).sum()
    }

    /// `τ(self* · other)`, the Hilbert–Schmidt pairing.
    pub fn pairing(&self, other: &Self) -> C64 {
        assert!(self.same_algebra(other), "elements belong to different algebras");
        self.blocks
            .iter()
            .zip(&other.blocks)
            .zip(self.algebra.blocks())
            .map(|((a, b), blk)| {
                a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x.conj() * y).sum::<C64>() * blk.weight
            })
            .sum()
    }

    /// `‖x‖_∞`, the largest singular value over all blocks.
    pub fn norm_inf(&self) -> f64 {
        self.blocks.iter().map(CMatrix::op_norm).fold(0.0, f64::max)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.blocks.iter().map(CMatrix::max_abs).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.blocks.iter().all(CMatrix::is_finite)
    }

    /// `‖x − x*‖_∞`
    pub fn selfadjoint_defect(&self) -> f64 {
        self.blocks.iter().map(|m| (m - &m.adjoint()).op_norm()).fold(0.0, f64::max)
    }

    pub fn is_selfadjoint(&self, tol: f64) -> bool {
        self.selfadjoint_defect() <= tol
    }

    /// Smallest eigenvalue of the selfadjoint part.
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks.iter().filter_map(|m| eigh(m).values.first().copied()).fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive(&self, tol: f64) -> bool {
        self.is_selfadjoint(tol) && self.min_eigenvalue() >= -tol
    }

    /// Verifies the claimed flags (with slack `tol · max(1, ‖x‖_∞)`) and records them.
    pub fn with_flags(mut self, claimed: Flags, tol: f64) -> Result<Self> {
        let slack = tol * self.norm_inf().max(1.0);
        if (claimed.selfadjoint || claimed.positive || claimed.projection) && !self.is_selfadjoint(slack) {
            return Err(invalid!("element is not selfadjoint"));
        }
        if claimed.positive && self.min_eigenvalue() < -slack {
            return Err(invalid!("element is not positive"));
        }
        if claimed.projection {
            let sq = &self * &self;
            if (&sq - &self).norm_inf() > slack {
                return Err(invalid!("element is not idempotent"));
            }
        }
        self.flags = Flags {
            selfadjoint: claimed.selfadjoint || claimed.positive || claimed.projection,
            positive: claimed.positive || claimed.projection,
            projection: claimed.projection,
        };
        Ok(self)
    }

    pub(crate) fn set_flags(mut self, flags: Flags) -> Self {
        self.flags = flags;
        self
    }

    /// `|x| = (x*x)^{1/2}`
    pub fn abs(&self) -> Self {
        let out = self.map_blocks(|m| {
            let s = svd(m);
            let sig = CMatrix::from_real_diag(&s.values);
            s.v.matmul(&sig).matmul(&s.v.adjoint())
        });
        out.set_flags(Flags { selfadjoint: true, positive: true, projection: false })
    }

    /// Row-major concatenation of all blocks.
    pub fn vectorize(&self) -> Vec<C64> {
        self.blocks.iter().flat_map(|m| m.as_slice().iter().copied()).collect()
    }

    pub fn from_vector(algebra: &Arc<TracedAlgebra>, v: &[C64]) -> Result<Self> {
        if v.len() != algebra.vector_len() {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} for algebra of size {}",
                v.len(),
                algebra.vector_len()
            )));
        }
        let mut offset = 0;
        let mut blocks = Vec::with_capacity(algebra.num_blocks());
        for b in algebra.blocks() {
            let len = b.dim * b.dim;
            blocks.push(CMatrix::from_row_major(b.dim, v[offset..offset + len].to_vec()).expect("length checked"));
            offset += len;
        }
        Self::from_blocks(algebra.clone(), blocks)
    }

    /// Singular values of every block paired with their block weight and index.
    pub fn singular_triples(&self) -> Vec<(f64, f64, usize)> {
        let mut out = Vec::new();
        for (i, (m, b)) in self.blocks.iter().zip(self.algebra.blocks()).enumerate() {
            for s in svd(m).values {
                out.push((s, b.weight, i));
            }
        }
        out
    }
}

impl Add for &Element {
    type Output = Element;

    fn add(self, rhs: &Element) -> Element {
        self.zip_blocks(rhs, |a, b| a + b)
    }
}

impl Sub for &Element {
    type Output = Element;

    fn sub(self, rhs: &Element) -> Element {
        self.zip_blocks(rhs, |a, b| a - b)
    }
}

impl Mul for &Element {
    type Output = Element;

    fn mul(self, rhs: &Element) -> Element {
        self.zip_blocks(rhs, |a, b| a * b)
    }
}
