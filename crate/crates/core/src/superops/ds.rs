use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::Rng;

use super::SuperOperator;
use crate::algebra::{fava_decompose, lp_norm, submajorizes_with};
use crate::error::invalid;
use crate::linalg::{CMatrix, C64};
use crate::rng::{gaussian_c64, random_element, random_unitary, stream};
use crate::{Element, Error, Result, Tolerances, TracedAlgebra};

pub const DEFAULT_TRIALS: usize = 64;

/// Seed of the sampling streams used when no seed is supplied.
const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsMethod {
    /// `c_∞ = ‖A(1)‖_∞` and `c_1 = ‖A†(1)‖_∞`, exact for positive maps.
    ExactPositive,
    /// Largest observed norm ratios; lower bounds only.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsRequest {
    /// Exact formulas for structural trees, sampling otherwise.
    Auto,
    /// Also use the exact formulas for explicit maps that pass the sampled positivity check.
    ExactPositive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DsCertificate {
    pub one_norm_bound: f64,
    pub sup_norm_bound: f64,
    pub positivity: bool,
    pub selfadjointness: bool,
    pub method: DsMethod,
    pub trials: usize,
    pub is_ds: bool,
}

pub fn verify_ds(a: &SuperOperator, trials: usize) -> DsCertificate {
    verify_ds_with(a, DsRequest::Auto, trials, DEFAULT_SEED, &Tolerances::default())
}

pub fn verify_ds_with(
    a: &SuperOperator,
    request: DsRequest,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> DsCertificate {
    let alg = a.algebra().clone();
    let positivity = positivity_with(a, trials, seed);
    let selfadjointness = a.is_structural() || sampled_selfadjoint(a, trials, seed);
    let adj = a.adjoint_wrt_trace();
    let one = Element::identity(&alg);
    let exact = a.is_structural() || (request == DsRequest::ExactPositive && positivity);

    let (c1, cinf, method) = if exact {
        let cinf = a.apply_unchecked(&one).norm_inf();
        let c1 = adj.apply_unchecked(&one).norm_inf();
        (c1, cinf, DsMethod::ExactPositive)
    } else {
        let mut rng = stream(seed, "verify_ds");
        // ‖A‖_{1→1} = ‖A†‖_{∞→∞}, so images of contractions under A† bound c_1 from below too.
        let mut cinf = a.apply_unchecked(&one).norm_inf();
        let mut c1 = adj.apply_unchecked(&one).norm_inf();
        for _ in 0..trials {
            let u = random_unitary(&mut rng, &alg);
            cinf = cinf.max(a.apply_unchecked(&u).norm_inf());
            c1 = c1.max(adj.apply_unchecked(&u).norm_inf());
            for x in [random_element(&mut rng, &alg), rank_one(&mut rng, &alg)] {
                cinf = cinf.max(ratio(a.apply_unchecked(&x).norm_inf(), x.norm_inf()));
                let n1 = lp_norm(&x, 1.0).unwrap_or(0.0);
                c1 = c1.max(ratio(lp_norm(&a.apply_unchecked(&x), 1.0).unwrap_or(f64::INFINITY), n1));
            }
        }
        (c1, cinf, DsMethod::Sampled)
    };
    let is_ds = c1 <= 1.0 + tol.ds_slack && cinf <= 1.0 + tol.ds_slack;
    DsCertificate { one_norm_bound: c1, sup_norm_bound: cinf, positivity, selfadjointness, method, trials, is_ds }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// `v w*` in one randomly chosen block, zero elsewhere.
fn rank_one<R: Rng + ?Sized>(rng: &mut R, alg: &Arc<TracedAlgebra>) -> Element {
    let k = rng.random_range(0..alg.num_blocks());
    let blocks = alg
        .blocks()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            if i == k {
                let v: Vec<C64> = (0..b.dim).map(|_| gaussian_c64(rng)).collect();
                let w: Vec<C64> = (0..b.dim).map(|_| gaussian_c64(rng)).collect();
                CMatrix::from_fn(b.dim, |r, c| v[r] * w[c].conj())
            } else {
                CMatrix::zeros(b.dim)
            }
        })
        .collect();
    Element::from_blocks_unchecked(alg.clone(), blocks)
}

fn sampled_selfadjoint(a: &SuperOperator, trials: usize, seed: u64) -> bool {
    let mut rng = stream(seed, "selfadjointness");
    (0..trials.max(1)).all(|_| {
        let x = random_element(&mut rng, a.algebra());
        let lhs = a.apply_unchecked(&x.adjoint());
        let rhs = a.apply_unchecked(&x).adjoint();
        (&lhs - &rhs).norm_inf() <= 1e-9 * x.norm_inf().max(1.0)
    })
}

/// Positivity of `A`: exact for structural trees, otherwise `A(x*x) ≥ 0` and
/// `A(vv*) ≥ 0` on `trials` seeded samples each.
pub fn check_positivity(a: &SuperOperator, trials: usize) -> bool {
    positivity_with(a, trials, DEFAULT_SEED)
}

fn positivity_with(a: &SuperOperator, trials: usize, seed: u64) -> bool {
    if a.is_structural() {
        return true;
    }
    let mut rng = stream(seed, "positivity");
    let alg = a.algebra().clone();
    (0..trials.max(1)).all(|_| {
        let x = random_element(&mut rng, &alg);
        let r = rank_one(&mut rng, &alg);
        [&x.adjoint() * &x, &r * &r.adjoint()].iter().all(|p| {
            let y = a.apply_unchecked(p);
            y.is_positive(1e-9 * p.norm_inf().max(1.0))
        })
    })
}

/// `A(x) ≺≺ x` for a certified Dunford–Schwartz map, with integral slack `ds_slack`.
pub fn audit_submajorization(a: &SuperOperator, x: &Element) -> Result<bool> {
    let cert = verify_ds(a, DEFAULT_TRIALS);
    if !cert.is_ds {
        return Err(invalid!(
            "map is not Dunford–Schwartz (c_1 = {}, c_∞ = {})",
            cert.one_norm_bound,
            cert.sup_norm_bound
        ));
    }
    let tol = Tolerances::default();
    let tol = Tolerances { integral_slack: tol.ds_slack, ..tol };
    submajorizes_with(x, &a.apply(x)?, &tol)
}

/// Splits `A(x) = A(y) + A(z)` where `x = y + z` is the spectral split at `δ / c_∞`,
/// so that `‖A(z)‖_∞ ≤ δ` and `A(y)` comes from a finite-trace part.
pub fn preserves_fava(a: &SuperOperator, x: &Element, delta: f64) -> Result<(Element, Element)> {
    let cert = verify_ds(a, DEFAULT_TRIALS);
    if !cert.selfadjointness {
        return Err(invalid!("map is not selfadjoint"));
    }
    let c = if cert.sup_norm_bound > 0.0 { cert.sup_norm_bound } else { 1.0 };
    let split = fava_decompose(x, delta / c)?;
    let ay = a.apply(&split.large)?;
    let az = a.apply(&split.small)?;
    let achieved = az.norm_inf();
    if achieved > delta * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::PostconditionViolation(format!("‖A(z)‖_∞ = {achieved:e} exceeds δ = {delta:e}")));
    }
    Ok((ay, az))
}
