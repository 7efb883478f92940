use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 methods are inherent when std is linked
use num_traits::Float;

use crate::{Element, Projection, Result, Tolerances, TracedAlgebra};

/// Builds `e = ∧_k χ_[0,δ_k](|d_k|)` with `τ(e⊥) ≤ ε`.
///
/// A forward pass lets difference `k` (0-based) spend up to the cumulative allowance
/// `ε (1 − 2^{−(k+1)})`, choosing the smallest admissible threshold among the singular
/// values of `d_k`. A reverse pass then spends what is left of `ε`, later differences
/// first. Returns `(e, degenerate)`; when `ε ≥ τ(1)` the zero projection is returned and
/// flagged as degenerate.
pub fn budget_witness(
    algebra: &Arc<TracedAlgebra>,
    diffs: &[Element],
    epsilon: f64,
    tol: &Tolerances,
) -> Result<(Projection, bool)> {
    if epsilon >= algebra.total_trace() {
        return Ok((Projection::zero(algebra), true));
    }
    let mut e = Projection::identity(algebra);
    let mut share = 1.0;
    for d in diffs {
        share *= 0.5;
        e = tighten(&e, d, epsilon * (1.0 - share), tol)?;
    }
    for d in diffs.iter().rev() {
        e = tighten(&e, d, epsilon, tol)?;
    }
    Ok((e, false))
}

/// `e ∧ χ_[0,δ](|d|)` for the smallest singular value `δ` of `d` (or 0) keeping the
/// deficiency within `budget`; `e` itself when no cut fits.
fn tighten(e: &Projection, d: &Element, budget: f64, tol: &Tolerances) -> Result<Projection> {
    let top = d.norm_inf();
    if top == 0.0 {
        return Ok(e.clone());
    }
    let floor = tol.rank_rel * top;
    let mut levels: Vec<f64> = d.singular_triples().into_iter().map(|t| t.0).filter(|&s| s > floor).collect();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    levels.dedup_by(|a, b| *a - *b <= floor);
    let limit = budget + tol.trace_slack;
    let cut = |level: f64| -> Result<Projection> {
        let g = Projection::abs_spectral(d, |s| s <= level + floor);
        e.meet(&g, tol.projection)
    };
    // levels[len−1] = ‖d‖ keeps everything; search the smallest admissible index.
    let (mut lo, mut hi) = (0usize, levels.len() - 1);
    let mut best = e.clone();
    while lo < hi {
        let mid = (lo + hi) / 2;
        let f = cut(levels[mid])?;
        if f.deficiency() <= limit {
            best = f;
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if hi == levels.len() - 1 {
        return Ok(e.clone());
    }
    Ok(best)
}
