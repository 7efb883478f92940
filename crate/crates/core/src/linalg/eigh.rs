use alloc::vec::Vec;

use super::{jacobi_rotation, rotate_columns, rotate_rows, CMatrix, C64, ZERO};

const MAX_SWEEPS: usize = 80;

/// Eigen-decomposition of a Hermitian matrix: `A = V diag(values) V*`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, matching `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V diag(f(λ)) V*`
    pub fn map(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.values.len();
        let fv: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        CMatrix::from_fn(n, |i, j| (0..n).map(|k| self.vectors[(i, k)] * fv[k] * self.vectors[(j, k)].conj()).sum())
    }
}

/// Cyclic complex Jacobi eigensolver. Only the Hermitian part of `a` is used.
pub fn eigh(a: &CMatrix) -> HermitianEigen {
    let n = a.dim();
    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius_norm();
    if scale > 0.0 {
        let floor = 1e-18 * scale;
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let g = m[(p, q)];
                    if g.norm() <= floor {
                        continue;
                    }
                    let j = jacobi_rotation(m[(p, p)].re, m[(q, q)].re, g);
                    rotate_columns(&mut m, p, q, &j);
                    rotate_rows(&mut m, p, q, &j);
                    m[(p, q)] = ZERO;
                    m[(q, p)] = ZERO;
                    m[(p, p)].im = 0.0;
                    m[(q, q)].im = 0.0;
                    rotate_columns(&mut v, p, q, &j);
                    rotated = true;
                }
            }
            if !rotated {
                break;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    HermitianEigen { values, vectors }
}
