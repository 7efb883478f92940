use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::linalg::C64;
use crate::rng::{random_element, stream};
use crate::superops::{verify_ds, DsCertificate, SuperOperator, DEFAULT_TRIALS};
use crate::{Element, Error, Result, Tolerances};

const DEFAULT_SEED: u64 = 0xe760;
const COMMUTATION_SAMPLES: usize = 10;

/// A monotone cofinal sequence of multi-indices standing in for a net `{n_α}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorNet {
    dimension: usize,
    indices: Vec<Vec<usize>>,
    sector_constant: Option<f64>,
}

impl SectorNet {
    /// Every coordinate must be non-decreasing along `indices`; when `c0` is given
    /// the sector condition `n_i / n_j ≤ c0` is checked as well.
    pub fn new(dimension: usize, indices: Vec<Vec<usize>>, c0: Option<f64>) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid!("net dimension must be positive"));
        }
        if indices.is_empty() {
            return Err(invalid!("net needs at least one index"));
        }
        if let Some(bad) = indices.iter().position(|n| n.len() != dimension) {
            return Err(Error::ShapeMismatch(format!("index {bad} does not have {dimension} coordinates")));
        }
        for (a, w) in indices.windows(2).enumerate() {
            if w[0].iter().zip(&w[1]).any(|(p, q)| q < p) {
                return Err(invalid!("net is not monotone at position {}", a + 1));
            }
        }
        let net = Self { dimension, indices, sector_constant: c0 };
        if let Some(c) = c0 {
            if !(c > 0.0) {
                return Err(invalid!("sector constant must be positive, got {c}"));
            }
            if !sector_check(&net, c) {
                return Err(invalid!("net leaves the sector with constant {c}"));
            }
        }
        Ok(net)
    }

    /// `{(k, …, k) : k = 1..=last}`.
    pub fn diagonal(dimension: usize, last: usize) -> Result<Self> {
        Self::new(dimension, (1..=last).map(|k| vec![k; dimension]).collect(), Some(1.0))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn sector_constant(&self) -> Option<f64> {
        self.sector_constant
    }
}

/// `n_i / n_j ≤ c0` for every index and every pair with `n_j ≠ 0`.
pub fn sector_check(net: &SectorNet, c0: f64) -> bool {
    net.indices.iter().all(|n| {
        let hi = n.iter().copied().max().unwrap_or(0);
        let lo = n.iter().copied().filter(|&v| v > 0).min();
        match lo {
            Some(lo) => hi as f64 <= c0 * lo as f64,
            None => true,
        }
    })
}

/// A family of positive Dunford–Schwartz maps whose pairwise commutation has been
/// checked on seeded samples.
#[derive(Debug, Clone)]
pub struct CommutingFamily {
    ops: Vec<SuperOperator>,
    certificates: Vec<DsCertificate>,
}

impl CommutingFamily {
    pub fn new(ops: Vec<SuperOperator>) -> Result<Self> {
        Self::with_seed(ops, DEFAULT_SEED, &Tolerances::default())
    }

    pub fn with_seed(ops: Vec<SuperOperator>, seed: u64, tol: &Tolerances) -> Result<Self> {
        let first = ops.first().ok_or_else(|| invalid!("operator family is empty"))?;
        let alg = first.algebra().clone();
        let zero = Element::zero(&alg);
        let mut certificates = Vec::with_capacity(ops.len());
        for (i, op) in ops.iter().enumerate() {
            op.apply(&zero)?;
            let cert = verify_ds(op, DEFAULT_TRIALS);
            if !(cert.is_ds && cert.positivity) {
                return Err(invalid!(
                    "operator {i} is not DS⁺ (c_1 = {}, c_∞ = {}, positive = {})",
                    cert.one_norm_bound,
                    cert.sup_norm_bound,
                    cert.positivity
                ));
            }
            certificates.push(cert);
        }
        let mut rng = stream(seed, "commutation");
        for _ in 0..COMMUTATION_SAMPLES {
            let y = random_element(&mut rng, &alg);
            for i in 0..ops.len() {
                for j in i + 1..ops.len() {
                    let ij = ops[i].apply(&ops[j].apply(&y)?)?;
                    let ji = ops[j].apply(&ops[i].apply(&y)?)?;
                    let gap = (&ij - &ji).norm_inf();
                    if gap > tol.commutation {
                        return Err(invalid!("operators {i} and {j} do not commute (‖T_iT_j y − T_jT_i y‖ = {gap:e})"));
                    }
                }
            }
        }
        Ok(Self { ops, certificates })
    }

    pub fn operators(&self) -> &[SuperOperator] {
        &self.ops
    }

    pub fn certificates(&self) -> &[DsCertificate] {
        &self.certificates
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// `(1/|n|) Σ_{0 ≤ k_i < n_i} T_1^{k_1} ⋯ T_d^{k_d}(x)`, where a zero coordinate
    /// contributes only `k_i = 0` and counts as 1 in `|n|`.
    ///
    /// Evaluated as successive one-dimensional averages, `O(Σ n_i)` applications.
    pub fn box_average(&self, x: &Element, n: &[usize]) -> Result<Element> {
        if n.len() != self.ops.len() {
            return Err(Error::ShapeMismatch(format!(
                "index has {} coordinates for {} operators",
                n.len(),
                self.ops.len()
            )));
        }
        let mut y = x.clone();
        for (op, &ni) in self.ops.iter().zip(n) {
            let m = ni.max(1);
            let mut acc = y.clone();
            let mut term = y;
            for _ in 1..m {
                term = op.apply(&term)?;
                acc.axpy(C64::new(1.0, 0.0), &term);
            }
            y = acc.scale_real(1.0 / m as f64);
        }
        Ok(y)
    }
}

pub fn box_average(ops: &[SuperOperator], x: &Element, n: &[usize]) -> Result<Element> {
    CommutingFamily::new(ops.to_vec())?.box_average(x, n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AverageMode {
    /// Running sums updated between consecutive indices.
    #[default]
    Incremental,
    /// Every index averaged from scratch.
    Independent,
}

/// Averages `A_α(x)` along a net.
#[derive(Debug, Clone)]
pub struct AverageTrace {
    pub indices: Vec<Vec<usize>>,
    pub averages: Vec<Element>,
    pub norms_inf: Vec<f64>,
    pub sector_constant: Option<f64>,
}

impl AverageTrace {
    pub fn len(&self) -> usize {
        self.averages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.averages.is_empty()
    }

    /// `‖A_α(x) − reference‖_∞` along the trace.
    pub fn errors_inf(&self, reference: &Element) -> Vec<f64> {
        self.averages.iter().map(|a| (a - reference).norm_inf()).collect()
    }
}

pub fn net_average_trace(
    family: &CommutingFamily,
    x: &Element,
    net: &SectorNet,
    mode: AverageMode,
) -> Result<AverageTrace> {
    if net.dimension != family.len() {
        return Err(Error::ShapeMismatch(format!("net of dimension {} for {} operators", net.dimension, family.len())));
    }
    family.ops[0].apply(x)?;
    let averages = match mode {
        AverageMode::Independent => net.indices.iter().map(|n| family.box_average(x, n)).collect::<Result<Vec<_>>>()?,
        AverageMode::Incremental => incremental(family, x, net)?,
    };
    Ok(AverageTrace {
        indices: net.indices.clone(),
        norms_inf: averages.iter().map(Element::norm_inf).collect(),
        averages,
        sector_constant: net.sector_constant,
    })
}

/// Keeps `V_J = Π_{i∈J} T_i^{m_i} Π_{i∉J} S_i(m_i) x` for every subset `J`, with
/// `S_i(m) = Σ_{k<m} T_i^k`. Raising `m_i` by one maps `V_J ↦ V_J + V_{J∪{i}}` for
/// `i ∉ J` and `V_J ↦ T_i V_J` for `i ∈ J`; the box sum is `V_∅`.
fn incremental(family: &CommutingFamily, x: &Element, net: &SectorNet) -> Result<Vec<Element>> {
    let d = family.len();
    let subsets = 1usize << d;
    let mut states: Vec<Element> = Vec::with_capacity(subsets);
    states.push(x.clone());
    for mask in 1..subsets {
        let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
        let prev = states[mask & !(1 << top)].clone();
        states.push(family.ops[top].apply(&prev)?);
    }
    let mut m = vec![1usize; d];
    let mut out = Vec::with_capacity(net.indices.len());
    for n in &net.indices {
        for i in 0..d {
            let target = n[i].max(1);
            while m[i] < target {
                let bit = 1usize << i;
                for mask in 0..subsets {
                    if mask & bit == 0 {
                        let add = states[mask | bit].clone();
                        states[mask].axpy(C64::new(1.0, 0.0), &add);
                    }
                }
                for (mask, state) in states.iter_mut().enumerate() {
                    if mask & bit != 0 {
                        *state = family.ops[i].apply(state)?;
                    }
                }
                m[i] += 1;
            }
        }
        let count: f64 = m.iter().map(|&v| v as f64).product();
        out.push(states[0].scale_real(1.0 / count));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::random_algebra;
    use crate::{Projection, TracedAlgebra};
    use alloc::sync::Arc;

    fn m2() -> Arc<TracedAlgebra> {
        Arc::new(TracedAlgebra::matrix(2).unwrap())
    }

    fn flip_conjugation(a: &Arc<TracedAlgebra>) -> SuperOperator {
        SuperOperator::unitary_conjugation(Element::diagonal(a, &[&[1.0, -1.0]]).unwrap()).unwrap()
    }

    #[test]
    fn identity_family() {
        let a = m2();
        let mut rng = stream(1, "t");
        let x = random_element(&mut rng, &a);
        let id = SuperOperator::identity(&a);
        for n in [0, 1, 5] {
            let y = box_average(core::slice::from_ref(&id), &x, &[n]).unwrap();
            assert!((&y - &x).max_abs_entry() < 1e-14);
        }
    }

    #[test]
    fn alternating_closed_form() {
        let a = m2();
        let x = Element::from_blocks(
            a.clone(),
            vec![crate::CMatrix::from_fn(2, |i, j| if i != j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })],
        )
        .unwrap();
        let fam = CommutingFamily::new(vec![flip_conjugation(&a)]).unwrap();
        for n in 1..12 {
            let y = fam.box_average(&x, &[n]).unwrap();
            let expect = if n % 2 == 1 { x.scale_real(1.0 / n as f64) } else { Element::zero(&a) };
            assert!((&y - &expect).max_abs_entry() < 1e-15, "n = {n}");
        }
    }

    #[test]
    fn factorized_matches_brute_force() {
        let mut rng = stream(2, "t");
        let a = random_algebra(&mut rng, 2, 3);
        let pin = |rng: &mut crate::rng::StreamRng| {
            let p = crate::rng::random_projection(rng, &a);
            SuperOperator::pinching(vec![p.clone(), p.complement()]).unwrap()
        };
        let p1 = pin(&mut rng);
        let u = SuperOperator::convex_combination(vec![(0.5, p1.clone()), (0.5, SuperOperator::identity(&a))]).unwrap();
        let fam = CommutingFamily::new(vec![p1.clone(), u.clone()]).unwrap();
        let x = random_element(&mut rng, &a);
        let n = [3, 4];
        let mut sum = Element::zero(&a);
        for k1 in 0..3 {
            for k2 in 0..4 {
                let mut y = x.clone();
                for _ in 0..k2 {
                    y = u.apply(&y).unwrap();
                }
                for _ in 0..k1 {
                    y = p1.apply(&y).unwrap();
                }
                sum = &sum + &y;
            }
        }
        let brute = sum.scale_real(1.0 / 12.0);
        assert!((&fam.box_average(&x, &n).unwrap() - &brute).max_abs_entry() < 1e-10);
    }

    #[test]
    fn non_commuting_rejected() {
        let a = m2();
        let flip = flip_conjugation(&a);
        let h = 0.5f64.sqrt();
        let had = Element::from_blocks(
            a.clone(),
            vec![crate::CMatrix::from_row_major(
                2,
                vec![C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)],
            )
            .unwrap()],
        )
        .unwrap();
        let had = SuperOperator::unitary_conjugation(had).unwrap();
        assert!(matches!(CommutingFamily::new(vec![flip, had]), Err(Error::InvalidInput(_))));
        let doubled = SuperOperator::explicit(&a, crate::CMatrix::identity(4).scale_real(2.0)).unwrap();
        assert!(matches!(CommutingFamily::new(vec![doubled]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn incremental_matches_independent() {
        let mut rng = stream(3, "t");
        let a = random_algebra(&mut rng, 2, 3);
        let q = Projection::identity(&a);
        let u = crate::rng::random_unitary(&mut rng, &a);
        let t2 = SuperOperator::unitary_conjugation(u.clone()).unwrap();
        let t3 = SuperOperator::pinching(vec![q]).unwrap();
        let fam = CommutingFamily::new(vec![t2.clone(), SuperOperator::power(t2, 2), t3]).unwrap();
        let x = random_element(&mut rng, &a);
        let idx = vec![vec![0, 0, 0], vec![1, 2, 0], vec![3, 3, 2], vec![3, 7, 5], vec![9, 9, 9]];
        let net = SectorNet::new(3, idx, None).unwrap();
        let inc = net_average_trace(&fam, &x, &net, AverageMode::Incremental).unwrap();
        let ind = net_average_trace(&fam, &x, &net, AverageMode::Independent).unwrap();
        for (p, q) in inc.averages.iter().zip(&ind.averages) {
            assert!((p - q).max_abs_entry() < 1e-10);
        }
    }

    #[test]
    fn sector_examples() {
        let diag = SectorNet::new(2, (1..20).map(|k| vec![k, k]).collect(), None).unwrap();
        assert!(sector_check(&diag, 1.0));
        let skew = SectorNet::new(2, (1..20).map(|k| vec![2 * k, 3 * k]).collect(), None).unwrap();
        assert!(sector_check(&skew, 1.5));
        assert!(!sector_check(&skew, 1.4));
        let square = SectorNet::new(2, (1..200).map(|k| vec![k, k * k]).collect(), None).unwrap();
        for c in [1.0, 10.0, 100.0] {
            assert!(!sector_check(&square, c));
        }
        assert!(SectorNet::new(2, (1..200).map(|k| vec![k, k * k]).collect(), Some(50.0)).is_err());
        assert!(SectorNet::new(1, vec![vec![3], vec![2]], None).is_err());
    }
}
