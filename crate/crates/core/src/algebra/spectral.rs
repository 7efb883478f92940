use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 methods are inherent when std is linked
use num_traits::Float;

use crate::error::invalid;
use crate::linalg::{eigh, svd, CMatrix, C64};
use crate::{Element, Error, Result, StepFunction, Tolerances};

/// Singular values of every block, with values at or below the rank threshold
/// `rank_rel · ‖x‖_∞` set to zero.
fn thresholded_singular_pairs(x: &Element, tol: &Tolerances) -> Result<Vec<(f64, f64)>> {
    if !x.is_finite() {
        return Err(invalid!("element has non-finite entries"));
    }
    let triples = x.singular_triples();
    let top = triples.iter().map(|t| t.0).fold(0.0, f64::max);
    let cut = tol.rank_rel * top;
    Ok(triples.into_iter().map(|(s, w, _)| (if s > cut { s } else { 0.0 }, w)).collect())
}

/// `t ↦ μ_t(x)`: singular values of all blocks sorted descending, each
/// occupying an interval whose length is its block weight.
pub fn mu(x: &Element) -> Result<StepFunction> {
    mu_with(x, &Tolerances::default())
}

pub fn mu_with(x: &Element, tol: &Tolerances) -> Result<StepFunction> {
    StepFunction::from_pieces(thresholded_singular_pairs(x, tol)?)
}

/// `μ_t(x)`; `μ_0(x) = ‖x‖_∞`.
pub fn mu_at(x: &Element, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid!("μ_t needs t ≥ 0, got {t}"));
    }
    Ok(mu(x)?.eval(t))
}

/// `μ_t(x) = inf{λ > 0 : τ(χ_(λ,∞)(|x|)) ≤ t}`, evaluated from the spectral family
/// of `|x|` without building the rearrangement.
pub fn mu_spectral(x: &Element, t: f64, tol: &Tolerances) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid!("μ_t needs t ≥ 0, got {t}"));
    }
    let pairs = thresholded_singular_pairs(x, tol)?;
    let tail_trace = |lambda: f64| pairs.iter().filter(|&&(s, _)| s > lambda).map(|&(_, w)| w).sum::<f64>();
    if tail_trace(0.0) <= t {
        return Ok(0.0);
    }
    // The admissible set is [λ*, ∞) with λ* one of the singular values.
    let mut best = f64::INFINITY;
    for &(s, _) in &pairs {
        if s > 0.0 && s < best && tail_trace(s) <= t {
            best = s;
        }
    }
    Ok(best)
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(invalid!("L^p norms need p ≥ 1, got {p}"))
    }
}

/// `‖x‖_p = (∫_0^∞ μ_t(x)^p dt)^{1/p}`, or `μ_0(x)` for `p = ∞`.
pub fn lp_norm(x: &Element, p: f64) -> Result<f64> {
    lp_norm_with(x, p, &Tolerances::default())
}

pub fn lp_norm_with(x: &Element, p: f64, tol: &Tolerances) -> Result<f64> {
    check_p(p)?;
    let f = mu_with(x, tol)?;
    if p.is_infinite() {
        return Ok(f.eval(0.0));
    }
    Ok(f.power_integral(p).powf(1.0 / p))
}

/// `‖x‖_p = τ(|x|^p)^{1/p}`, with the spectrum of `|x|` read from the Hermitian
/// dilation `[[0, x], [x*, 0]]` of every block (eigenvalues `±σ_i`).
pub fn trace_lp_norm(x: &Element, p: f64) -> Result<f64> {
    check_p(p)?;
    if !x.is_finite() {
        return Err(invalid!("element has non-finite entries"));
    }
    let mut acc: f64 = 0.0;
    for (m, b) in x.blocks().iter().zip(x.algebra().blocks()) {
        let n = m.dim();
        let dilation = CMatrix::from_fn(2 * n, |i, j| match (i < n, j < n) {
            (true, false) => m[(i, j - n)],
            (false, true) => m[(j, i - n)].conj(),
            _ => C64::new(0.0, 0.0),
        });
        let spectrum = eigh(&dilation).values;
        for &lambda in &spectrum[n..] {
            let s = lambda.max(0.0);
            if p.is_infinite() {
                acc = acc.max(s);
            } else {
                acc += b.weight * s.powf(p);
            }
        }
    }
    Ok(if p.is_infinite() { acc } else { acc.powf(1.0 / p) })
}

/// [`lp_norm`] cross-checked against [`trace_lp_norm`]: fails with a numeric
/// error when the two routes disagree by more than `1e-9` relative.
pub fn lp_norm_checked(x: &Element, p: f64, tol: &Tolerances) -> Result<f64> {
    let a = lp_norm_with(x, p, tol)?;
    let b = trace_lp_norm(x, p)?;
    if (a - b).abs() > 1e-9 * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
        return Err(Error::NumericFailure(format!("L^{p} routes disagree: rearrangement {a:e}, trace {b:e}")));
    }
    Ok(a)
}

/// `K(x, s) = ∫_0^s μ_t(x) dt`.
pub fn k_functional(x: &Element, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(invalid!("K-functional needs s > 0, got {s}"));
    }
    Ok(mu(x)?.integral(s))
}

/// Splits `x = y + z` at the singular-value level `m`: with `x = U Σ V*`,
/// `y = U (Σ − m)₊ V*` and `z = U min(Σ, m) V*`, so that
/// `‖y‖_1 = Σ w (σ − m)₊` and `‖z‖_∞ = min(‖x‖_∞, m)`.
pub fn clip_decompose(x: &Element, level: f64) -> Result<(Element, Element)> {
    if !(level >= 0.0) {
        return Err(invalid!("clip level must be ≥ 0, got {level}"));
    }
    let mut ys = Vec::with_capacity(x.blocks().len());
    let mut zs = Vec::with_capacity(x.blocks().len());
    for m in x.blocks() {
        let s = svd(m);
        let high: Vec<f64> = s.values.iter().map(|&v| (v - level).max(0.0)).collect();
        let low: Vec<f64> = s.values.iter().map(|&v| v.min(level)).collect();
        let vh = s.v.adjoint();
        ys.push(s.u.matmul(&CMatrix::from_real_diag(&high)).matmul(&vh));
        zs.push(s.u.matmul(&CMatrix::from_real_diag(&low)).matmul(&vh));
    }
    Ok((Element::from_blocks(x.algebra().clone(), ys)?, Element::from_blocks(x.algebra().clone(), zs)?))
}

/// `y ≺≺ x`, i.e. `∫_0^s μ_t(y) dt ≤ ∫_0^s μ_t(x) dt` for all `s > 0`.
/// The elements may live in different algebras.
pub fn submajorizes(x: &Element, y: &Element) -> Result<bool> {
    submajorizes_with(x, y, &Tolerances::default())
}

pub fn submajorizes_with(x: &Element, y: &Element, tol: &Tolerances) -> Result<bool> {
    let fx = mu_with(x, tol)?;
    let fy = mu_with(y, tol)?;
    Ok(fy.is_submajorized_by(&fx, tol.integral_slack))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TracedAlgebra;
    use alloc::sync::Arc;
    use alloc::vec;

    fn alg(blocks: &[(usize, f64)]) -> Arc<TracedAlgebra> {
        Arc::new(TracedAlgebra::new(blocks).unwrap())
    }

    #[test]
    fn mu_identity_in_m3() {
        let a = alg(&[(3, 1.0)]);
        let f = mu(&Element::identity(&a)).unwrap();
        assert_eq!(f.breakpoints(), &[0.0, 3.0]);
        assert_eq!(f.values(), &[1.0]);
        assert_eq!(mu_at(&Element::identity(&a), 2.5).unwrap(), 1.0);
        assert_eq!(mu_at(&Element::identity(&a), 3.0).unwrap(), 0.0);
    }

    #[test]
    fn mu_diag_three_one() {
        let a = alg(&[(2, 1.0)]);
        let x = Element::diagonal(&a, &[&[3.0, 1.0]]).unwrap();
        let f = mu(&x).unwrap();
        assert_eq!(f.breakpoints(), &[0.0, 1.0, 2.0]);
        assert_eq!(f.values(), &[3.0, 1.0]);
        assert_eq!(mu_at(&x, 1.0).unwrap(), 1.0);
        assert_eq!(mu_at(&x, 0.0).unwrap(), 3.0);
    }

    #[test]
    fn mu_weighted_blocks() {
        let a = alg(&[(1, 0.5), (1, 2.0)]);
        let x = Element::diagonal(&a, &[&[5.0], &[2.0]]).unwrap();
        let f = mu(&x).unwrap();
        assert_eq!(f.breakpoints(), &[0.0, 0.5, 2.5]);
        assert_eq!(f.values(), &[5.0, 2.0]);
    }

    #[test]
    fn mu_rejects_negative_t() {
        let a = alg(&[(1, 1.0)]);
        assert!(matches!(mu_at(&Element::identity(&a), -1.0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn spectral_family_route_matches() {
        let a = alg(&[(2, 1.0)]);
        let x = Element::diagonal(&a, &[&[3.0, 1.0]]).unwrap();
        let tol = Tolerances::default();
        for t in [0.0, 0.5, 1.0, 1.5, 2.0, 7.0] {
            assert_eq!(mu_spectral(&x, t, &tol).unwrap(), mu_at(&x, t).unwrap(), "t = {t}");
        }
    }

    #[test]
    fn lp_norm_examples() {
        let a3 = alg(&[(3, 1.0)]);
        let one = Element::identity(&a3);
        assert!((lp_norm(&one, 2.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(lp_norm(&one, f64::INFINITY).unwrap(), 1.0);
        let a = alg(&[(2, 1.0)]);
        let x = Element::diagonal(&a, &[&[3.0, 4.0]]).unwrap();
        assert_eq!(lp_norm(&x, 1.0).unwrap(), 7.0);
        assert_eq!(lp_norm(&x, 2.0).unwrap(), 5.0);
        assert_eq!(lp_norm(&x, f64::INFINITY).unwrap(), 4.0);
        assert!((trace_lp_norm(&x, 2.0).unwrap() - 5.0).abs() < 1e-14);
        assert!(matches!(lp_norm(&x, 0.5), Err(Error::InvalidInput(_))));
        assert!(lp_norm_checked(&x, 3.0, &Tolerances::default()).is_ok());
    }

    #[test]
    fn k_functional_examples() {
        let a3 = alg(&[(3, 1.0)]);
        assert_eq!(k_functional(&Element::identity(&a3), 2.0).unwrap(), 2.0);
        let a = alg(&[(2, 1.0)]);
        let x = Element::diagonal(&a, &[&[3.0, 1.0]]).unwrap();
        assert_eq!(k_functional(&x, 1.5).unwrap(), 3.5);
        assert!(k_functional(&x, 0.0).is_err());
    }

    #[test]
    fn clip_reassembles() {
        let a = alg(&[(2, 1.0)]);
        let x = Element::diagonal(&a, &[&[3.0, -1.0]]).unwrap();
        let (y, z) = clip_decompose(&x, 2.0).unwrap();
        assert!((&(&y + &z) - &x).max_abs_entry() < 1e-15);
        assert!((lp_norm(&y, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((z.norm_inf() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn submajorization_examples() {
        let a = alg(&[(2, 1.0)]);
        let x = Element::diagonal(&a, &[&[2.0, 0.0]]).unwrap();
        let y = Element::diagonal(&a, &[&[1.0, 1.0]]).unwrap();
        assert!(submajorizes(&x, &y).unwrap());
        assert!(!submajorizes(&y, &x).unwrap());
        assert!(submajorizes(&x, &x).unwrap());
        // across algebras
        let b = alg(&[(1, 2.0)]);
        let w = Element::diagonal(&b, &[&[1.0]]).unwrap();
        assert!(submajorizes(&x, &w).unwrap());
        let _ = vec![0];
    }
}
