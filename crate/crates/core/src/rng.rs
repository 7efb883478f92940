//! Seeded randomness.
//!
//! Every run owns one 64-bit master seed. Independent consumers draw from named
//! streams: the ChaCha8 seed of stream `name` is the SHA-256 digest of
//! `master_seed (little endian) ‖ name`. Adding a stream never perturbs another.

use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::algebra::{Element, Projection, TracedAlgebra};
use crate::linalg::{CMatrix, C64};
use crate::superops::SuperOperator;
use alloc::sync::Arc;

pub type StreamRng = ChaCha8Rng;

pub fn stream(master_seed: u64, name: &str) -> StreamRng {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(name.as_bytes());
    let digest = h.finalize();
    let mut seed = [0u8; 32];
    seed.copy_from_slice(&digest[..32]);
    ChaCha8Rng::from_seed(seed)
}

pub fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    CMatrix::from_fn(n, |_, _| gaussian_c64(rng))
}

pub fn hermitian_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    gaussian_matrix(rng, n).hermitian_part()
}

/// Haar-ish unitary from Gram–Schmidt on a Gaussian matrix.
pub fn unitary_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = gaussian_matrix(rng, n);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        for _ in 0..2 {
            for c in &cols {
                let dot: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= dot * ci;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for vi in &mut v {
            *vi /= norm;
        }
        cols.push(v);
    }
    CMatrix::from_fn(n, |i, j| cols[j][i])
}

pub fn random_element<R: Rng + ?Sized>(rng: &mut R, algebra: &Arc<TracedAlgebra>) -> Element {
    let blocks = algebra.blocks().iter().map(|b| gaussian_matrix(rng, b.dim)).collect();
    Element::from_blocks(algebra.clone(), blocks).expect("shapes follow the algebra")
}

pub fn random_selfadjoint<R: Rng + ?Sized>(rng: &mut R, algebra: &Arc<TracedAlgebra>) -> Element {
    let blocks = algebra.blocks().iter().map(|b| hermitian_matrix(rng, b.dim)).collect();
    Element::from_blocks(algebra.clone(), blocks).expect("shapes follow the algebra")
}

pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, algebra: &Arc<TracedAlgebra>) -> Element {
    let blocks = algebra.blocks().iter().map(|b| unitary_matrix(rng, b.dim)).collect();
    Element::from_blocks(algebra.clone(), blocks).expect("shapes follow the algebra")
}

/// Projection onto the span of the first `rank_i` columns of a random unitary in each block,
/// with `rank_i` uniform in `0..=dim_i`.
pub fn random_projection<R: Rng + ?Sized>(rng: &mut R, algebra: &Arc<TracedAlgebra>) -> Projection {
    let bases = algebra
        .blocks()
        .iter()
        .map(|b| {
            let u = unitary_matrix(rng, b.dim);
            let rank = rng.random_range(0..=b.dim);
            (0..rank).map(|k| u.column(k)).collect()
        })
        .collect();
    Projection::from_orthonormal(algebra.clone(), bases).expect("orthonormal by construction")
}

/// A random algebra with `1..=max_blocks` blocks of dims `1..=max_dim` and weights in `[0.25, 4)`.
pub fn random_algebra<R: Rng + ?Sized>(rng: &mut R, max_blocks: usize, max_dim: usize) -> Arc<TracedAlgebra> {
    let k = rng.random_range(1..=max_blocks);
    let blocks = (0..k)
        .map(|_| {
            let dim = rng.random_range(1..=max_dim);
            let weight = 0.25 * 16.0.powf(rng.random::<f64>());
            (dim, weight)
        })
        .collect::<Vec<_>>();
    Arc::new(TracedAlgebra::new(&blocks).expect("valid random algebra"))
}

/// Pinching by a random orthogonal partition of unity: the columns of a random unitary
/// in every block, split into up to `parts` consecutive groups.
pub fn random_pinching<R: Rng + ?Sized>(rng: &mut R, algebra: &Arc<TracedAlgebra>, parts: usize) -> SuperOperator {
    let parts = parts.max(1);
    let mut bases: Vec<Vec<Vec<Vec<C64>>>> = (0..parts).map(|_| Vec::new()).collect();
    for b in algebra.blocks() {
        let u = unitary_matrix(rng, b.dim);
        let labels: Vec<usize> = (0..b.dim).map(|_| rng.random_range(0..parts)).collect();
        for (p, basis) in bases.iter_mut().enumerate() {
            basis.push((0..b.dim).filter(|&k| labels[k] == p).map(|k| u.column(k)).collect());
        }
    }
    let projections = bases
        .into_iter()
        .map(|b| Projection::from_orthonormal(algebra.clone(), b).expect("orthonormal by construction"))
        .collect();
    SuperOperator::pinching(projections).expect("partition of unity by construction")
}

/// A random positive Dunford–Schwartz map built from the structural constructors only,
/// nested up to `depth` levels.
pub fn random_structural_map<R: Rng + ?Sized>(
    rng: &mut R,
    algebra: &Arc<TracedAlgebra>,
    depth: usize,
) -> SuperOperator {
    let leaf = depth == 0;
    match rng.random_range(0..if leaf { 3 } else { 6 }) {
        0 => SuperOperator::unitary_conjugation(random_unitary(rng, algebra)).expect("unitary by construction"),
        1 => {
            let parts = rng.random_range(1..=3);
            random_pinching(rng, algebra, parts)
        }
        2 => {
            let labels =
                algebra.blocks().iter().map(|b| (0..b.dim).map(|_| rng.random_range(0..2)).collect()).collect();
            SuperOperator::block_diagonal_expectation(algebra, labels).expect("labels follow the algebra")
        }
        3 => {
            let k = rng.random_range(1..=3);
            let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
            let total: f64 = raw.iter().sum::<f64>() / rng.random_range(0.5..1.0);
            let terms = raw.iter().map(|w| (w / total, random_structural_map(rng, algebra, depth - 1))).collect();
            SuperOperator::convex_combination(terms).expect("weights sum to at most 1")
        }
        4 => {
            let k = rng.random_range(1..=3);
            let ops = (0..k).map(|_| random_structural_map(rng, algebra, depth - 1)).collect();
            SuperOperator::composition(ops).expect("shared algebra")
        }
        _ => {
            let k = rng.random_range(0..=4);
            SuperOperator::power(random_structural_map(rng, algebra, depth - 1), k)
        }
    }
}
