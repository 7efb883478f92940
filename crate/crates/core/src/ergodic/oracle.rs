use alloc::vec::Vec;

use crate::linalg::{eigh, CMatrix, C64};
use crate::superops::SuperOperator;
use crate::{Element, Error, Result};

const CLUSTER_TOL: f64 = 1e-8;

/// Limit of the Cesàro averages of a commuting family of unitary conjugations:
/// the pinching onto the joint eigenspaces of the unitaries, computed as the
/// successive eigenspace pinchings of each `u_i`.
pub fn cesaro_limit_oracle(ops: &[SuperOperator], x: &Element) -> Result<Element> {
    let mut y = x.clone();
    for (i, op) in ops.iter().enumerate() {
        let u = op
            .as_conjugation()
            .ok_or_else(|| Error::Unsupported(alloc::format!("operator {i} is not a unitary conjugation")))?;
        u.check_same_algebra(x)?;
        let blocks = y
            .blocks()
            .iter()
            .zip(u.blocks())
            .map(|(m, ub)| {
                let mut acc = CMatrix::zeros(m.dim());
                for space in unitary_eigenspaces(ub) {
                    let p = CMatrix::projector_onto(m.dim(), &space);
                    acc = &acc + &p.matmul(m).matmul(&p);
                }
                acc
            })
            .collect();
        y = Element::from_blocks(x.algebra().clone(), blocks)?;
    }
    Ok(y)
}

/// Orthonormal bases of the eigenspaces of a unitary (more generally normal) matrix.
///
/// The Hermitian part is diagonalized first; inside each of its eigenspaces the
/// skew part is diagonalized to separate conjugate eigenvalues.
fn unitary_eigenspaces(u: &CMatrix) -> Vec<Vec<Vec<C64>>> {
    let n = u.dim();
    let re = u.hermitian_part();
    let im = (u - &u.adjoint()).scale(C64::new(0.0, -0.5));
    let er = eigh(&re);
    let mut spaces = Vec::new();
    for cluster in clusters(&er.values) {
        let q: Vec<Vec<C64>> = cluster.iter().map(|&k| er.vector(k)).collect();
        let r = q.len();
        // Compression of the skew part to the cluster.
        let b = CMatrix::from_fn(r, |a, c| {
            let mut s = C64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    s += q[a][i].conj() * im[(i, j)] * q[c][j];
                }
            }
            s
        });
        let eb = eigh(&b);
        for sub in clusters(&eb.values) {
            let vectors = sub
                .iter()
                .map(|&k| {
                    let w = eb.vector(k);
                    (0..n).map(|i| (0..r).map(|a| q[a][i] * w[a]).sum()).collect()
                })
                .collect();
            spaces.push(vectors);
        }
    }
    spaces
}

/// Groups ascending values whose consecutive gaps are at most `CLUSTER_TOL`.
fn clusters(values: &[f64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(last) if v - values[*last.last().unwrap()] <= CLUSTER_TOL => last.push(k),
            _ => out.push(alloc::vec![k]),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{random_element, random_unitary, stream, unitary_matrix};
    use crate::TracedAlgebra;
    use alloc::sync::Arc;
    use alloc::vec;

    #[test]
    fn trivial_unitary() {
        let a = Arc::new(TracedAlgebra::matrix(3).unwrap());
        let mut rng = stream(1, "t");
        let x = random_element(&mut rng, &a);
        let op = SuperOperator::unitary_conjugation(Element::identity(&a)).unwrap();
        assert!((&cesaro_limit_oracle(&[op], &x).unwrap() - &x).max_abs_entry() < 1e-14);
    }

    #[test]
    fn flip_gives_diagonal() {
        let a = Arc::new(TracedAlgebra::matrix(2).unwrap());
        let x =
            Element::from_blocks(a.clone(), vec![CMatrix::from_fn(2, |i, j| C64::new((2 * i + j + 1) as f64, 0.5))])
                .unwrap();
        let op = SuperOperator::unitary_conjugation(Element::diagonal(&a, &[&[1.0, -1.0]]).unwrap()).unwrap();
        let y = cesaro_limit_oracle(&[op], &x).unwrap();
        let expect =
            Element::from_blocks(a.clone(), vec![CMatrix::from_diag(&[C64::new(1.0, 0.5), C64::new(4.0, 0.5)])])
                .unwrap();
        assert!((&y - &expect).max_abs_entry() < 1e-14);
    }

    #[test]
    fn conjugate_eigenvalues_are_separated() {
        // diag(i, −i) in a rotated basis: the real part is degenerate.
        let mut rng = stream(2, "t");
        let v = unitary_matrix(&mut rng, 2);
        let d = CMatrix::from_diag(&[C64::new(0.0, 1.0), C64::new(0.0, -1.0)]);
        let u = d.conjugate_by(&v);
        let spaces = unitary_eigenspaces(&u);
        assert_eq!(spaces.len(), 2);
        for s in &spaces {
            assert_eq!(s.len(), 1);
        }
    }

    #[test]
    fn order_independent_for_commuting_pair() {
        let a = Arc::new(TracedAlgebra::matrix(4).unwrap());
        let mut rng = stream(3, "t");
        let w = random_unitary(&mut rng, &a);
        let phases = |p: [f64; 4]| {
            let d = CMatrix::from_diag(&p.map(|t| C64::from_polar(1.0, t)));
            Element::from_blocks(a.clone(), vec![d.conjugate_by(w.block(0))]).unwrap()
        };
        let u1 = SuperOperator::unitary_conjugation(phases([0.0, 0.0, 1.0, 1.0])).unwrap();
        let u2 = SuperOperator::unitary_conjugation(phases([0.0, 2.0, 0.0, 2.0])).unwrap();
        let x = random_element(&mut rng, &a);
        let y12 = cesaro_limit_oracle(&[u1.clone(), u2.clone()], &x).unwrap();
        let y21 = cesaro_limit_oracle(&[u2, u1], &x).unwrap();
        assert!((&y12 - &y21).max_abs_entry() < 1e-12);
        // Joint eigenspaces are one-dimensional, so the limit is diagonal in the rotated basis.
        let back = y12.block(0).conjugate_by(&w.block(0).adjoint());
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!(back[(i, j)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_non_conjugations() {
        let a = Arc::new(TracedAlgebra::matrix(2).unwrap());
        let op = SuperOperator::diagonal_pinching(&a);
        assert!(matches!(cesaro_limit_oracle(&[op], &Element::zero(&a)), Err(Error::Unsupported(_))));
    }
}
