use alloc::format;

use crate::algebra::spectral::mu;
use crate::error::invalid;
use crate::{Element, Error, Projection, Result, Tolerances};

/// The closed zero-neighbourhood `N(ε, δ)` of the measure topology.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureNeighborhood {
    epsilon: f64,
    delta: f64,
}

impl MeasureNeighborhood {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite() && delta > 0.0 && delta.is_finite()) {
            return Err(invalid!("neighbourhood parameters must be positive and finite (ε = {epsilon}, δ = {delta})"));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// `d(x, y) = inf{ε > 0 : μ_ε(x − y) ≤ ε}`.
pub fn measure_metric(x: &Element, y: &Element) -> Result<f64> {
    x.check_same_algebra(y)?;
    let f = mu(&(x - y))?;
    // On a step [a, b) with value v the admissible ε form [max(a, v), b) ∩ [a, b).
    for (a, b, v) in f.steps() {
        let candidate = a.max(v);
        if candidate < b {
            return Ok(candidate);
        }
    }
    Ok(f.support_end())
}

/// Membership `x ∈ N(ε, δ)`, decided by `μ_ε(x) ≤ δ`. On success returns the
/// witness `e = χ_[0,δ](|x|)`, which has `τ(e⊥) ≤ ε` and `‖xe‖_∞ ≤ δ`.
pub fn in_neighborhood(x: &Element, nbhd: &MeasureNeighborhood) -> Result<Option<Projection>> {
    let f = mu(x)?;
    if f.eval(nbhd.epsilon) > nbhd.delta {
        return Ok(None);
    }
    let top = f.eval(0.0);
    let cut = Tolerances::default().rank_rel * top;
    let delta = nbhd.delta;
    let e = Projection::abs_spectral(x, |s| s <= delta || s <= cut);
    debug_assert!(e.deficiency() <= nbhd.epsilon + 1e-12);
    Ok(Some(e))
}

/// Given a projection `e`, builds `f = e ∧ χ_[0,δ](|xe|)` with `δ = ‖exe‖_∞`.
/// Then `τ(f⊥) ≤ 2τ(e⊥)` and `‖xf‖_∞ ≤ ‖exe‖_∞`; both are asserted before returning.
pub fn enlarge_projection(x: &Element, e: &Projection) -> Result<Projection> {
    enlarge_projection_with(x, e, &Tolerances::default())
}

pub fn enlarge_projection_with(x: &Element, e: &Projection, tol: &Tolerances) -> Result<Projection> {
    x.check_same_algebra(e.as_element())?;
    let ep = e.as_element();
    let xe = x * ep;
    let delta = (ep * &xe).norm_inf();
    let scale = x.norm_inf().max(1.0);
    let cut = delta + tol.rank_rel * scale;
    let g = Projection::abs_spectral(&xe, |s| s <= cut);
    let f = e.meet(&g, tol.projection)?;

    let bound_trace = 2.0 * e.deficiency();
    if f.deficiency() > bound_trace + 1e-9 {
        return Err(Error::PostconditionViolation(format!(
            "τ(f⊥) = {} exceeds 2τ(e⊥) = {bound_trace}",
            f.deficiency()
        )));
    }
    let achieved = (x * f.as_element()).norm_inf();
    if achieved > delta + 1e-9 * scale {
        return Err(Error::PostconditionViolation(format!("‖xf‖ = {achieved:e} exceeds ‖exe‖ = {delta:e}")));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CMatrix, C64};
    use crate::TracedAlgebra;
    use alloc::sync::Arc;
    use alloc::vec;

    fn m2() -> Arc<TracedAlgebra> {
        Arc::new(TracedAlgebra::matrix(2).unwrap())
    }

    #[test]
    fn metric_examples() {
        let a = m2();
        let x = Element::diagonal(&a, &[&[3.0, 1.0]]).unwrap();
        let zero = Element::zero(&a);
        assert_eq!(measure_metric(&x, &x).unwrap(), 0.0);
        assert_eq!(measure_metric(&x, &zero).unwrap(), 1.0);
        let small = Element::diagonal(&a, &[&[0.2, 0.2]]).unwrap();
        assert_eq!(measure_metric(&small, &zero).unwrap(), 0.2);
        let other = Arc::new(TracedAlgebra::matrix(3).unwrap());
        assert!(matches!(measure_metric(&x, &Element::zero(&other)), Err(Error::AlgebraMismatch)));
    }

    #[test]
    fn neighborhood_examples() {
        let a = m2();
        let zero = Element::zero(&a);
        let w = in_neighborhood(&zero, &MeasureNeighborhood::new(0.1, 0.1).unwrap()).unwrap().unwrap();
        assert!(w.is_identity());
        let x = Element::diagonal(&a, &[&[3.0, 1.0]]).unwrap();
        let w = in_neighborhood(&x, &MeasureNeighborhood::new(1.5, 1.0).unwrap()).unwrap().unwrap();
        let expect = Element::diagonal(&a, &[&[0.0, 1.0]]).unwrap();
        assert!((&expect - w.as_element()).max_abs_entry() < 1e-15);
        assert!(in_neighborhood(&x, &MeasureNeighborhood::new(0.5, 1.0).unwrap()).unwrap().is_none());
        assert!(MeasureNeighborhood::new(0.0, 1.0).is_err());
        assert!(MeasureNeighborhood::new(1.0, -1.0).is_err());
    }

    #[test]
    fn enlarge_identity() {
        let a = m2();
        let x = Element::diagonal(&a, &[&[3.0, 1.0]]).unwrap();
        let f = enlarge_projection(&x, &Projection::identity(&a)).unwrap();
        assert_eq!(f.deficiency(), 0.0);
        assert!((&x * f.as_element()).norm_inf() <= 3.0 + 1e-12);
    }

    #[test]
    fn enlarge_nilpotent_example() {
        let a = m2();
        let mut m = CMatrix::zeros(2);
        m[(0, 1)] = C64::new(2.0, 0.0);
        let x = Element::from_blocks(a.clone(), vec![m]).unwrap();
        let e = Projection::from_element(&Element::diagonal(&a, &[&[1.0, 0.0]]).unwrap(), 1e-10).unwrap();
        let f = enlarge_projection(&x, &e).unwrap();
        assert!((f.as_element() - e.as_element()).max_abs_entry() < 1e-15);
        assert_eq!((&x * f.as_element()).norm_inf(), 0.0);
    }
}
