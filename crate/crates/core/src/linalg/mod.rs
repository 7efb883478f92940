//! Dense square complex matrices and the two Jacobi factorizations the rest of
//! the crate is built on.

mod eigh;
mod svd;

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};
#[allow(unused_imports)] // f64 methods are inherent when std is linked
use num_traits::Float;

use num_complex::Complex;

pub use eigh::{eigh, HermitianEigen};
pub use svd::{svd, Svd};

pub type C64 = Complex<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from row-major data; `None` if the length is not a square of `n`.
    pub fn from_row_major(n: usize, data: Vec<C64>) -> Option<Self> {
        (data.len() == n * n).then_some(Self { n, data })
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&z| z * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&z| z * c).collect() }
    }

    /// `self += c · other`
    pub fn axpy(&mut self, c: C64, other: &Self) {
        debug_assert_eq!(self.n, other.n);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `u · self · u*`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max |a_ij − conj(a_ji)|`
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(A + A*) / 2`
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        svd(self).values.first().copied().unwrap_or(0.0)
    }

    /// `Σ_i v_i v_i*` over the given orthonormal columns.
    pub fn projector_onto(n: usize, vectors: &[Vec<C64>]) -> Self {
        let mut p = Self::zeros(n);
        for v in vectors {
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        p
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        debug_assert_eq!(self.n, rhs.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        debug_assert_eq!(self.n, rhs.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

/// Applies the 2×2 unitary `j` to columns `p`, `q` of `m`: `m ← m · J`.
pub(crate) fn rotate_columns(m: &mut CMatrix, p: usize, q: usize, j: &[[C64; 2]; 2]) {
    let n = m.n;
    for i in 0..n {
        let a = m.data[i * n + p];
        let b = m.data[i * n + q];
        m.data[i * n + p] = j[0][0] * a + j[1][0] * b;
        m.data[i * n + q] = j[0][1] * a + j[1][1] * b;
    }
}

/// `m ← J* · m` restricted to rows `p`, `q`.
pub(crate) fn rotate_rows(m: &mut CMatrix, p: usize, q: usize, j: &[[C64; 2]; 2]) {
    let n = m.n;
    for k in 0..n {
        let a = m.data[p * n + k];
        let b = m.data[q * n + k];
        m.data[p * n + k] = j[0][0].conj() * a + j[1][0].conj() * b;
        m.data[q * n + k] = j[0][1].conj() * a + j[1][1].conj() * b;
    }
}

/// Unitary `J` with `J* [[a, g], [conj g, b]] J` diagonal (`a`, `b` real).
pub(crate) fn jacobi_rotation(a: f64, b: f64, g: C64) -> [[C64; 2]; 2] {
    let r = g.norm();
    let phase = g / r;
    let theta = (b - a) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let ph = phase.conj();
    [[C64::new(c, 0.0), C64::new(s, 0.0)], [ph * -s, ph * c]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_rotation_diagonalizes_two_by_two() {
        let g = C64::new(0.3, -1.2);
        let m = CMatrix::from_row_major(2, vec![C64::new(2.0, 0.0), g, g.conj(), C64::new(-1.0, 0.0)]).unwrap();
        let j = jacobi_rotation(2.0, -1.0, g);
        let jm = CMatrix::from_row_major(2, vec![j[0][0], j[0][1], j[1][0], j[1][1]]).unwrap();
        let d = jm.adjoint().matmul(&m).matmul(&jm);
        assert!(d[(0, 1)].norm() < 1e-14);
        assert!((&jm.adjoint().matmul(&jm) - &CMatrix::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn matmul_and_adjoint() {
        let a = CMatrix::from_fn(3, |i, j| C64::new(i as f64, j as f64));
        let b = CMatrix::identity(3);
        assert_eq!(a.matmul(&b), a);
        assert_eq!(a.adjoint().adjoint(), a);
        assert_eq!(a.adjoint()[(0, 2)], C64::new(2.0, -0.0));
    }
}
