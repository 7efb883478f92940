//! Finite-horizon certificates of almost-uniform (a.u.) and bilaterally almost-uniform
//! (b.a.u.) convergence.
//!
//! A certificate exhibits a projection `e` with `τ(e⊥) ≤ ε` and reports the achieved
//! bounds `‖(x̂ − x_α) e‖_∞` (a.u.) or `‖e (x̂ − x_α) e‖_∞` (b.a.u.) along a finite
//! trace. "Certified" is a judgment about the observed horizon only.

mod budget;

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 methods are inherent when std is linked
use num_traits::Float;

use crate::algebra::{enlarge_projection_with, measure_metric};
use crate::error::invalid;
use crate::{Element, Error, Projection, Result, Tolerances, TracedAlgebra};

pub use budget::budget_witness;

/// A finite prefix `x_0, …, x_{N−1}` of a net, all in one algebra.
#[derive(Debug, Clone)]
pub struct FiniteTrace {
    elements: Vec<Element>,
}

impl FiniteTrace {
    pub fn new(elements: Vec<Element>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| invalid!("trace must contain at least one element"))?;
        for x in &elements[1..] {
            first.check_same_algebra(x)?;
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn algebra(&self) -> &Arc<TracedAlgebra> {
        self.elements[0].algebra()
    }

    pub fn last(&self) -> &Element {
        self.elements.last().expect("non-empty")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// One-sided bounds `‖y e‖_∞`.
    Au,
    /// Two-sided bounds `‖e y e‖_∞`.
    Bau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Certified,
    RefutedAtHorizon,
}

#[derive(Debug, Clone)]
pub enum Witness {
    /// One projection for every index.
    Uniform(Projection),
    /// A projection per difference (convergence in measure).
    PerEntry(Vec<Projection>),
}

/// Which differences the bounds refer to.
#[derive(Debug, Clone)]
pub enum DifferenceBasis {
    /// `x̂ − x_α` for every index `α`.
    AgainstLimit(Element),
    /// `x_α − x_{anchor(α)}`; see [`certify_cauchy`].
    Anchored { windows: Vec<(usize, usize)>, pairs: Vec<(usize, usize)> },
}

#[derive(Debug, Clone)]
pub struct WitnessCertificate {
    pub mode: Mode,
    pub epsilon: f64,
    pub witness: Witness,
    /// `τ(e⊥)`, the largest over all projections for per-entry witnesses.
    pub trace_deficiency: f64,
    /// Achieved bound for every difference of the basis.
    pub entry_bounds: Vec<f64>,
    /// `(index, bound)`: per index against a limit, per window start for Cauchy certificates.
    pub tail_bounds: Vec<(usize, f64)>,
    pub verdict: Verdict,
    /// Number of elements of the certified trace.
    pub horizon: usize,
    /// Level below which the final tail bounds must fall.
    pub tolerance: f64,
    /// Set when `ε ≥ τ(1)` and the zero projection is admissible.
    pub degenerate: bool,
    pub basis: DifferenceBasis,
}

impl WitnessCertificate {
    /// The bound the verdict is judged on: the last window tail for Cauchy certificates,
    /// the largest bound of the final dyadic window against a limit.
    pub fn final_bound(&self) -> f64 {
        if let DifferenceBasis::Anchored { .. } = self.basis {
            return self.tail_bounds.last().map_or(0.0, |t| t.1);
        }
        windows(self.tail_bounds.len())
            .last()
            .map(|&(a, b)| self.tail_bounds[a..b].iter().map(|t| t.1).fold(0.0, f64::max))
            .unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    /// Verdict level for the final window of tail bounds.
    pub tolerance: f64,
    /// How many trailing elements `extract_limit` compares with the last one.
    pub limit_tail: usize,
    /// Largest admissible measure-metric modulus in `extract_limit`.
    pub limit_tolerance: f64,
    pub numeric: Tolerances,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { tolerance: 1e-2, limit_tail: 4, limit_tolerance: 1e-2, numeric: Tolerances::default() }
    }
}

/// Dyadic windows `[2^j − 1, 2^{j+1} − 1)` covering `0..n`; a final window shorter than
/// half its nominal length is merged into its predecessor.
pub fn windows(n: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    let mut start = 0usize;
    let mut len = 1usize;
    while start < n {
        let end = (start + len).min(n);
        if end - start < len.div_ceil(2) && !out.is_empty() {
            out.last_mut().unwrap().1 = end;
        } else {
            out.push((start, end));
        }
        start = end;
        len *= 2;
    }
    out
}

/// Certified iff the largest bound in the final window is at most `tol` and no larger
/// than the largest bound of the window before it.
fn verdict(bounds: &[f64], tol: f64) -> Verdict {
    let w = windows(bounds.len());
    let max_of = |&(a, b): &(usize, usize)| bounds[a..b].iter().copied().fold(0.0, f64::max);
    let last = w.last().map(max_of).unwrap_or(0.0);
    let monotone = w.len() < 2 || last <= max_of(&w[w.len() - 2]);
    if last <= tol && monotone {
        Verdict::Certified
    } else {
        Verdict::RefutedAtHorizon
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(invalid!("ε must be positive and finite, got {epsilon}"))
    }
}

/// `(‖y e‖_∞, ‖e y e‖_∞)`.
fn compressed_norms(y: &Element, e: &Element) -> (f64, f64) {
    let ye = y * e;
    let eye = e * &ye;
    (ye.norm_inf(), eye.norm_inf())
}

/// Uniform bounds for the differences against one projection; for a.u. certificates the
/// two-sided bound is asserted to be no larger than the one-sided one.
fn uniform_bounds(diffs: &[Element], e: &Projection, mode: Mode) -> Result<Vec<f64>> {
    diffs
        .iter()
        .map(|d| {
            let (au, bau) = compressed_norms(d, e.as_element());
            match mode {
                Mode::Au => {
                    if bau > au + 1e-12 * au.max(1.0) {
                        return Err(Error::PostconditionViolation(format!("‖eye‖ = {bau:e} exceeds ‖ye‖ = {au:e}")));
                    }
                    Ok(au)
                }
                Mode::Bau => Ok(bau),
            }
        })
        .collect()
}

/// Witness `e = ∧_α χ_[0,δ_α](|x̂ − x_α|)` with the thresholds chosen by trace budgeting,
/// and the achieved bounds against `limit`.
pub fn witness_convergence(
    trace: &FiniteTrace,
    limit: &Element,
    epsilon: f64,
    mode: Mode,
) -> Result<WitnessCertificate> {
    witness_convergence_with(trace, limit, epsilon, mode, &CertifyOptions::default())
}

pub fn witness_convergence_with(
    trace: &FiniteTrace,
    limit: &Element,
    epsilon: f64,
    mode: Mode,
    opts: &CertifyOptions,
) -> Result<WitnessCertificate> {
    check_epsilon(epsilon)?;
    limit.check_same_algebra(&trace.elements[0])?;
    let diffs: Vec<Element> = trace.elements.iter().map(|x| limit - x).collect();
    let (e, degenerate) = budget_witness(trace.algebra(), &diffs, epsilon, &opts.numeric)?;
    let entry_bounds = uniform_bounds(&diffs, &e, mode)?;
    let tail_bounds: Vec<(usize, f64)> = entry_bounds.iter().copied().enumerate().collect();
    Ok(WitnessCertificate {
        mode,
        epsilon,
        trace_deficiency: e.deficiency(),
        witness: Witness::Uniform(e),
        verdict: verdict(&entry_bounds, opts.tolerance),
        entry_bounds,
        tail_bounds,
        horizon: trace.len(),
        tolerance: opts.tolerance,
        degenerate,
        basis: DifferenceBasis::AgainstLimit(limit.clone()),
    })
}

/// Cauchy certificate over dyadic windows `W_j = [a_j, b_j)`.
///
/// The witness is budgeted over the anchored differences `x_α − x_{a_j}` for `α ∈ W_j`
/// and `α = a_{j+1}`. With `s_j` the largest achieved bound in window `j`, the reported
/// tail bound `2 Σ_{i≥j} s_i` dominates `‖(x_α − x_β) e‖` (or `‖e (x_α − x_β) e‖`) for
/// all `α, β ≥ a_j`.
pub fn certify_cauchy(trace: &FiniteTrace, epsilon: f64, mode: Mode) -> Result<WitnessCertificate> {
    certify_cauchy_with(trace, epsilon, mode, &CertifyOptions::default())
}

pub fn certify_cauchy_with(
    trace: &FiniteTrace,
    epsilon: f64,
    mode: Mode,
    opts: &CertifyOptions,
) -> Result<WitnessCertificate> {
    check_epsilon(epsilon)?;
    let w = windows(trace.len());
    let pairs = anchored_pairs(&w);
    let xs = &trace.elements;
    let diffs: Vec<Element> = pairs.iter().map(|&(a, b)| &xs[b] - &xs[a]).collect();
    let (e, degenerate) = budget_witness(trace.algebra(), &diffs, epsilon, &opts.numeric)?;
    let entry_bounds = uniform_bounds(&diffs, &e, mode)?;
    let tail_bounds = window_tails(&w, &pairs, &entry_bounds);
    let tb: Vec<f64> = tail_bounds.iter().map(|t| t.1).collect();
    let last = tb.last().copied().unwrap_or(0.0);
    let verdict = if last <= opts.tolerance { Verdict::Certified } else { Verdict::RefutedAtHorizon };
    Ok(WitnessCertificate {
        mode,
        epsilon,
        trace_deficiency: e.deficiency(),
        witness: Witness::Uniform(e),
        entry_bounds,
        tail_bounds,
        verdict,
        horizon: trace.len(),
        tolerance: opts.tolerance,
        degenerate,
        basis: DifferenceBasis::Anchored { windows: w, pairs },
    })
}

/// `(anchor, α)` for every `α` in a window (anchor = window start) and for every next anchor.
fn anchored_pairs(w: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (j, &(a, b)) in w.iter().enumerate() {
        for alpha in a..b {
            pairs.push((a, alpha));
        }
        if let Some(&(next, _)) = w.get(j + 1) {
            pairs.push((a, next));
        }
    }
    pairs
}

fn window_tails(w: &[(usize, usize)], pairs: &[(usize, usize)], bounds: &[f64]) -> Vec<(usize, f64)> {
    let s: Vec<f64> = w
        .iter()
        .map(|&(a, _)| pairs.iter().zip(bounds).filter(|(p, _)| p.0 == a).map(|(_, &b)| b).fold(0.0, f64::max))
        .collect();
    let mut tails = alloc::vec![(0usize, 0.0f64); w.len()];
    let mut acc = 0.0;
    for j in (0..w.len()).rev() {
        acc += s[j];
        tails[j] = (w[j].0, 2.0 * acc);
    }
    tails
}

/// Upgrades a b.a.u. certificate to one-sided bounds: for every difference `y` the
/// projection `f = e ∧ χ_[0,‖eye‖](|ye|)` has `τ(f⊥) ≤ 2τ(e⊥)` and `‖y f‖ ≤ ‖e y e‖`.
pub fn bilateral_to_onesided(trace: &FiniteTrace, certificate: &WitnessCertificate) -> Result<WitnessCertificate> {
    bilateral_to_onesided_with(trace, certificate, &CertifyOptions::default())
}

pub fn bilateral_to_onesided_with(
    trace: &FiniteTrace,
    certificate: &WitnessCertificate,
    opts: &CertifyOptions,
) -> Result<WitnessCertificate> {
    if certificate.mode != Mode::Bau {
        return Err(invalid!("bilateral_to_onesided needs a b.a.u. certificate"));
    }
    if certificate.horizon != trace.len() {
        return Err(invalid!(
            "certificate horizon {} does not match the trace length {}",
            certificate.horizon,
            trace.len()
        ));
    }
    let e = match &certificate.witness {
        Witness::Uniform(e) => e,
        Witness::PerEntry(_) => return Err(invalid!("bilateral witness must be a single projection")),
    };
    let xs = &trace.elements;
    let diffs: Vec<Element> = match &certificate.basis {
        DifferenceBasis::AgainstLimit(limit) => xs.iter().map(|x| limit - x).collect(),
        DifferenceBasis::Anchored { pairs, .. } => pairs.iter().map(|&(a, b)| &xs[b] - &xs[a]).collect(),
    };
    let mut projections = Vec::with_capacity(diffs.len());
    let mut bounds = Vec::with_capacity(diffs.len());
    let mut deficiency: f64 = 0.0;
    for (k, d) in diffs.iter().enumerate() {
        let f = enlarge_projection_with(d, e, &opts.numeric).map_err(|err| match err {
            Error::PostconditionViolation(m) => Error::NumericFailure(format!("difference {k}: {m}")),
            other => other,
        })?;
        let one_sided = (d * f.as_element()).norm_inf();
        let bilateral = certificate.entry_bounds[k];
        if one_sided > bilateral + 1e-9 * d.norm_inf().max(1.0) {
            return Err(Error::NumericFailure(format!(
                "difference {k}: one-sided bound {one_sided:e} exceeds the bilateral bound {bilateral:e}"
            )));
        }
        if f.deficiency() > 2.0 * e.deficiency() + 1e-9 {
            return Err(Error::NumericFailure(format!("difference {k}: τ(f⊥) exceeds 2τ(e⊥)")));
        }
        deficiency = deficiency.max(f.deficiency());
        bounds.push(one_sided);
        projections.push(f);
    }
    let (tail_bounds, verdict) = match &certificate.basis {
        DifferenceBasis::AgainstLimit(_) => {
            (bounds.iter().copied().enumerate().collect::<Vec<_>>(), verdict(&bounds, certificate.tolerance))
        }
        DifferenceBasis::Anchored { windows, pairs } => {
            let t = window_tails(windows, pairs, &bounds);
            let last = t.last().map(|x| x.1).unwrap_or(0.0);
            (t, if last <= certificate.tolerance { Verdict::Certified } else { Verdict::RefutedAtHorizon })
        }
    };
    Ok(WitnessCertificate {
        mode: Mode::Au,
        epsilon: 2.0 * certificate.epsilon,
        witness: Witness::PerEntry(projections),
        trace_deficiency: deficiency,
        entry_bounds: bounds,
        tail_bounds,
        verdict,
        horizon: certificate.horizon,
        tolerance: certificate.tolerance,
        degenerate: certificate.degenerate,
        basis: certificate.basis.clone(),
    })
}

/// The last element of the trace as a candidate limit, with its measure-metric
/// modulus `max d(x_α, x_last)` over the preceding `limit_tail` elements.
pub fn extract_limit(trace: &FiniteTrace) -> Result<(Element, f64)> {
    extract_limit_with(trace, &CertifyOptions::default())
}

pub fn extract_limit_with(trace: &FiniteTrace, opts: &CertifyOptions) -> Result<(Element, f64)> {
    let n = trace.len();
    let last = trace.last();
    let from = n.saturating_sub(opts.limit_tail.max(1) + 1);
    let mut modulus: f64 = 0.0;
    for x in &trace.elements[from..n - 1] {
        modulus = modulus.max(measure_metric(x, last)?);
    }
    if modulus > opts.limit_tolerance {
        return Err(Error::NoLimit(format!(
            "measure-metric modulus {modulus:e} over the last {} elements exceeds {:e}",
            n - 1 - from,
            opts.limit_tolerance
        )));
    }
    Ok((last.clone(), modulus))
}

/// `N` one-dimensional blocks with weights `2^{−k}`, `k = 1..=N`, and the functions
/// `f_n = Σ_{k≤n} 2^k χ_k` (so `‖f_n‖_1 = n`); the limit candidate is `f_N`.
pub fn remark32_model(n: usize) -> Result<(Arc<TracedAlgebra>, FiniteTrace, Element)> {
    if n == 0 {
        return Err(invalid!("model needs N ≥ 1"));
    }
    let blocks: Vec<(usize, f64)> = (1..=n).map(|k| (1, (-(k as i32) as f64).exp2())).collect();
    let alg = Arc::new(TracedAlgebra::new(&blocks)?);
    let elements = (1..=n)
        .map(|m| {
            let diag: Vec<f64> = (1..=n).map(|k| if k <= m { (k as f64).exp2() } else { 0.0 }).collect();
            let rows: Vec<&[f64]> = diag.iter().map(core::slice::from_ref).collect();
            Element::diagonal(&alg, &rows)
        })
        .collect::<Result<Vec<_>>>()?;
    let limit = elements.last().expect("n ≥ 1").clone();
    Ok((alg, FiniteTrace::new(elements)?, limit))
}

#[cfg(test)]
mod tests;
