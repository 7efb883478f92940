use alloc::vec::Vec;
#[allow(unused_imports)] // f64 methods are inherent when std is linked
use num_traits::Float;

use super::{jacobi_rotation, rotate_columns, CMatrix, C64};

const MAX_SWEEPS: usize = 80;

/// Singular value decomposition `X = U diag(values) V*`.
#[derive(Debug, Clone)]
pub struct Svd {
    /// Singular values, descending.
    pub values: Vec<f64>,
    /// Left singular vectors as columns (columns for zero singular values are zero).
    pub u: CMatrix,
    /// Right singular vectors as columns; always a full unitary.
    pub v: CMatrix,
}

impl Svd {
    pub fn right_vector(&self, k: usize) -> Vec<C64> {
        self.v.column(k)
    }
}

/// One-sided (Hestenes) Jacobi SVD. Orthogonalizes the columns of `X V`.
pub fn svd(x: &CMatrix) -> Svd {
    let n = x.dim();
    let mut w = x.clone();
    let mut v = CMatrix::identity(n);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = C64::new(0.0, 0.0);
                for i in 0..n {
                    let a = w[(i, p)];
                    let b = w[(i, q)];
                    alpha += a.norm_sqr();
                    beta += b.norm_sqr();
                    gamma += a.conj() * b;
                }
                if alpha == 0.0 || beta == 0.0 || gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                let j = jacobi_rotation(alpha, beta, gamma);
                rotate_columns(&mut w, p, q, &j);
                rotate_columns(&mut v, p, q, &j);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| (0..n).map(|i| w[(i, j)].norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let u = CMatrix::from_fn(n, |i, k| {
        let s = norms[order[k]];
        if s > 0.0 {
            w[(i, order[k])] / s
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let v = CMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    Svd { values, u, v }
}
