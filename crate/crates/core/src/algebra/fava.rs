use crate::error::invalid;
use crate::linalg::{eigh, C64};
use crate::{Element, Result, Tolerances};

use super::spectral::mu;

/// `x = large + small` with `small` the spectral part of `x` on `|λ| ≤ δ`.
#[derive(Debug, Clone)]
pub struct FavaSplit {
    /// Spectral part on `|λ| > δ` (finite trace support).
    pub large: Element,
    /// Spectral part on `|λ| ≤ δ`; `‖small‖_∞ ≤ δ`.
    pub small: Element,
    /// `τ(χ_(δ,∞)(|x|))`, the trace of the support of `large`.
    pub large_support_trace: f64,
}

/// Splits a selfadjoint `x` into a finite-support part and a part of norm at most `δ`.
pub fn fava_decompose(x: &Element, delta: f64) -> Result<FavaSplit> {
    if !(delta > 0.0) {
        return Err(invalid!("δ must be positive, got {delta}"));
    }
    let tol = Tolerances::default();
    if !x.is_selfadjoint(tol.flag * x.norm_inf().max(1.0)) {
        return Err(invalid!("fava_decompose needs a selfadjoint element"));
    }
    let mut support = 0.0;
    let small = x.map_blocks(|m| {
        let e = eigh(m);
        e.map(|l| if l.abs() <= delta { C64::new(l, 0.0) } else { C64::new(0.0, 0.0) })
    });
    for (m, b) in x.blocks().iter().zip(x.algebra().blocks()) {
        support += b.weight * eigh(m).values.iter().filter(|l| l.abs() > delta).count() as f64;
    }
    let large = x - &small;
    Ok(FavaSplit { large, small, large_support_trace: support })
}

/// Finite-horizon surrogate for `μ_t(x) → 0`: `μ_horizon(x) ≤ tol`.
pub fn fava_membership(x: &Element, horizon: f64, tol: f64) -> Result<bool> {
    if !(horizon > 0.0) {
        return Err(invalid!("horizon must be positive, got {horizon}"));
    }
    Ok(mu(x)?.eval(horizon) <= tol)
}
