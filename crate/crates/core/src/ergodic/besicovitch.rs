use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 methods are inherent when std is linked
use num_traits::Float;

use crate::error::invalid;
use crate::linalg::{eigh, CMatrix, HermitianEigen, C64};
use crate::superops::{Node, SuperOperator};
use crate::{Element, Error, Result};

const MAX_HALVINGS: u32 = 18;
const CHECK_POINTS: usize = 16;
const CHECK_TAIL: usize = 3;

/// `p(t) = Σ_j w_j e^{iθ_j t}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigPolynomial {
    terms: Vec<(C64, f64)>,
}

impl TrigPolynomial {
    /// Terms are `(w_j, θ_j)`.
    pub fn new(terms: Vec<(C64, f64)>) -> Result<Self> {
        if terms.iter().any(|(w, th)| !(w.re.is_finite() && w.im.is_finite() && th.is_finite())) {
            return Err(invalid!("trigonometric polynomial terms must be finite"));
        }
        Ok(Self { terms })
    }

    pub fn constant(c: C64) -> Self {
        Self { terms: alloc::vec![(c, 0.0)] }
    }

    pub fn terms(&self) -> &[(C64, f64)] {
        &self.terms
    }

    pub fn eval(&self, t: f64) -> C64 {
        self.terms.iter().map(|&(w, th)| w * C64::from_polar(1.0, th * t)).sum()
    }

    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|(w, _)| w.norm()).sum()
    }

    fn bandwidth(&self) -> f64 {
        self.terms.iter().map(|(_, th)| th.abs()).fold(0.0, f64::max)
    }
}

/// The part of a Besicovitch function not captured by its trigonometric polynomial.
#[derive(Debug, Clone, PartialEq)]
pub enum Residual {
    Zero,
    /// `a · sign(sin(ω s))`.
    SquareWave {
        amplitude: f64,
        frequency: f64,
    },
    /// `a / (1 + s)`.
    HarmonicDecay {
        amplitude: f64,
    },
    /// Piecewise constant samples `values[k]` on `[k·step, (k+1)·step)`, zero beyond.
    Sampled {
        step: f64,
        values: Vec<C64>,
    },
}

impl Residual {
    pub fn eval(&self, s: f64) -> C64 {
        match self {
            Residual::Zero => C64::new(0.0, 0.0),
            Residual::SquareWave { amplitude, frequency } => {
                let v = (frequency * s).sin();
                let sign = if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                C64::new(amplitude * sign, 0.0)
            }
            Residual::HarmonicDecay { amplitude } => C64::new(amplitude / (1.0 + s), 0.0),
            Residual::Sampled { step, values } => {
                let k = (s / step).floor();
                if k >= 0.0 && (k as usize) < values.len() {
                    values[k as usize]
                } else {
                    C64::new(0.0, 0.0)
                }
            }
        }
    }

    pub fn sup_bound(&self) -> f64 {
        match self {
            Residual::Zero => 0.0,
            Residual::SquareWave { amplitude, .. } | Residual::HarmonicDecay { amplitude } => amplitude.abs(),
            Residual::Sampled { values, .. } => values.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    fn frequency(&self) -> f64 {
        match self {
            Residual::SquareWave { frequency, .. } => frequency.abs(),
            Residual::Sampled { step, .. } => 1.0 / step,
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Residual::Zero => true,
            Residual::SquareWave { amplitude, frequency } => amplitude.is_finite() && frequency.is_finite(),
            Residual::HarmonicDecay { amplitude } => amplitude.is_finite(),
            Residual::Sampled { step, values } => {
                *step > 0.0 && step.is_finite() && values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(invalid!("residual parameters must be finite (and the sample step positive)"))
        }
    }
}

/// `β = p + r` with `p` a trigonometric polynomial and `r` a bounded residual.
#[derive(Debug, Clone, PartialEq)]
pub struct BesicovitchFunction {
    polynomial: TrigPolynomial,
    residual: Residual,
}

impl BesicovitchFunction {
    pub fn new(polynomial: TrigPolynomial, residual: Residual) -> Result<Self> {
        residual.validate()?;
        Ok(Self { polynomial, residual })
    }

    pub fn polynomial(&self) -> &TrigPolynomial {
        &self.polynomial
    }

    pub fn residual(&self) -> &Residual {
        &self.residual
    }

    pub fn eval(&self, s: f64) -> C64 {
        self.polynomial.eval(s) + self.residual.eval(s)
    }

    /// `‖β‖_∞ ≤ Σ|w_j| + ‖r‖_∞`.
    pub fn sup_bound(&self) -> f64 {
        self.polynomial.sup_bound() + self.residual.sup_bound()
    }
}

/// A strongly continuous semigroup of positive Dunford–Schwartz maps.
#[derive(Debug, Clone)]
pub enum Semigroup {
    /// `T_s(x) = e^{isH} x e^{−isH}`.
    UnitaryFlow { generator: Element, spectral: Vec<HermitianEigen> },
    /// `T_s(x) = e^{−s} x + (1 − e^{−s}) E(x)` for a pinching or block-diagonal expectation `E`.
    InterpolationFlow { expectation: SuperOperator },
}

impl Semigroup {
    pub fn unitary_flow(generator: Element) -> Result<Self> {
        if !generator.is_selfadjoint(1e-10 * generator.norm_inf().max(1.0)) {
            return Err(invalid!("flow generator must be selfadjoint"));
        }
        let spectral = generator.blocks().iter().map(eigh).collect();
        Ok(Semigroup::UnitaryFlow { generator, spectral })
    }

    pub fn identity(algebra: &alloc::sync::Arc<crate::TracedAlgebra>) -> Self {
        Self::unitary_flow(Element::zero(algebra)).expect("zero is selfadjoint")
    }

    pub fn interpolation_flow(expectation: SuperOperator) -> Result<Self> {
        match expectation.node() {
            Node::Pinching(_) | Node::BlockDiagonalExpectation(_) => Ok(Semigroup::InterpolationFlow { expectation }),
            _ => Err(invalid!("interpolation flows need a pinching or block-diagonal expectation")),
        }
    }

    pub fn algebra(&self) -> &alloc::sync::Arc<crate::TracedAlgebra> {
        match self {
            Semigroup::UnitaryFlow { generator, .. } => generator.algebra(),
            Semigroup::InterpolationFlow { expectation } => expectation.algebra(),
        }
    }

    /// `T_s(x)`.
    pub fn apply(&self, s: f64, x: &Element) -> Result<Element> {
        x.check_same_algebra(&Element::zero(self.algebra()))?;
        Ok(match self {
            Semigroup::UnitaryFlow { spectral, .. } => {
                let blocks = x
                    .blocks()
                    .iter()
                    .zip(spectral)
                    .map(|(m, e)| {
                        let u = e.map(|h| C64::from_polar(1.0, s * h));
                        m.conjugate_by(&u)
                    })
                    .collect();
                Element::from_blocks(x.algebra().clone(), blocks)?
            }
            Semigroup::InterpolationFlow { expectation } => {
                let decay = (-s).exp();
                let mut y = x.scale_real(decay);
                y.axpy(C64::new(1.0 - decay, 0.0), &expectation.apply(x)?);
                y
            }
        })
    }

    fn bandwidth(&self) -> f64 {
        match self {
            Semigroup::UnitaryFlow { spectral, .. } => spectral
                .iter()
                .map(|e| e.values.last().copied().unwrap_or(0.0) - e.values.first().copied().unwrap_or(0.0))
                .fold(0.0, f64::max),
            Semigroup::InterpolationFlow { .. } => 1.0,
        }
    }
}

/// The integrand `s ↦ β(s) T_s(x)` in a form that is cheap to evaluate: for unitary
/// flows `x` is held in the eigenbasis of the generator (an isometric change of basis).
enum Prepared<'a> {
    Unitary { xt: Vec<CMatrix>, spectral: &'a [HermitianEigen] },
    Interpolation { x: Vec<C64>, ex: Vec<C64> },
}

impl Prepared<'_> {
    fn new<'a>(flow: &'a Semigroup, x: &Element) -> Result<Prepared<'a>> {
        Ok(match flow {
            Semigroup::UnitaryFlow { spectral, .. } => Prepared::Unitary {
                xt: x.blocks().iter().zip(spectral).map(|(m, e)| m.conjugate_by(&e.vectors.adjoint())).collect(),
                spectral,
            },
            Semigroup::InterpolationFlow { expectation } => {
                Prepared::Interpolation { x: x.vectorize(), ex: expectation.apply(x)?.vectorize() }
            }
        })
    }

    /// Adds `c · β(s) T_s(x)` (in the prepared basis) to `acc`.
    fn accumulate(&self, beta: &BesicovitchFunction, s: f64, c: f64, acc: &mut [C64]) {
        let b = beta.eval(s) * c;
        match self {
            Prepared::Unitary { xt, spectral } => {
                let mut off = 0;
                for (m, e) in xt.iter().zip(spectral.iter()) {
                    let n = m.dim();
                    let phases: Vec<C64> = e.values.iter().map(|&h| C64::from_polar(1.0, s * h)).collect();
                    for j in 0..n {
                        for k in 0..n {
                            acc[off + j * n + k] += b * phases[j] * phases[k].conj() * m[(j, k)];
                        }
                    }
                    off += n * n;
                }
            }
            Prepared::Interpolation { x, ex } => {
                let decay = (-s).exp();
                let (p, q) = (b * decay, b * (1.0 - decay));
                for ((a, xv), ev) in acc.iter_mut().zip(x).zip(ex) {
                    *a += p * xv + q * ev;
                }
            }
        }
    }

    fn len(&self) -> usize {
        match self {
            Prepared::Unitary { xt, .. } => xt.iter().map(|m| m.dim() * m.dim()).sum(),
            Prepared::Interpolation { x, .. } => x.len(),
        }
    }

    fn finish(&self, alg: &alloc::sync::Arc<crate::TracedAlgebra>, v: &[C64]) -> Element {
        let e = Element::from_vector(alg, v).expect("length follows the algebra");
        match self {
            Prepared::Unitary { spectral, .. } => {
                let blocks = e.blocks().iter().zip(spectral.iter()).map(|(m, s)| m.conjugate_by(&s.vectors)).collect();
                Element::from_blocks(alg.clone(), blocks).expect("shapes follow the algebra")
            }
            Prepared::Interpolation { .. } => e,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureResult {
    /// `B_t(x) = (1/t) ∫_0^t β(s) T_s(x) ds`.
    pub value: Element,
    /// Number of Simpson intervals of the accepted rule.
    pub intervals: usize,
    /// `‖·‖_∞` change between the last two refinements.
    pub last_change: f64,
}

fn check_args(t: f64, x: &Element, flow: &Semigroup) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(invalid!("averaging time must be positive and finite, got {t}"));
    }
    x.check_same_algebra(&Element::zero(flow.algebra()))
}

/// Composite Simpson quadrature of `B_t(x)`, halving the step until two successive
/// rules differ by less than `quad_tol` in `‖·‖_∞`.
pub fn besicovitch_average(
    beta: &BesicovitchFunction,
    flow: &Semigroup,
    x: &Element,
    t: f64,
    quad_tol: f64,
) -> Result<QuadratureResult> {
    check_args(t, x, flow)?;
    if !(quad_tol > 0.0) {
        return Err(invalid!("quadrature tolerance must be positive, got {quad_tol}"));
    }
    let prep = Prepared::new(flow, x)?;
    let alg = x.algebra();
    let len = prep.len();
    let omega = beta.polynomial.bandwidth() + beta.residual.frequency() + flow.bandwidth() + 1.0;
    let mut n = ((t * omega).ceil() as usize).max(4);
    n += n % 2;

    let mut ends = alloc::vec![C64::new(0.0, 0.0); len];
    prep.accumulate(beta, 0.0, 1.0, &mut ends);
    prep.accumulate(beta, t, 1.0, &mut ends);
    // `inner` holds the interior points of the previous grid, `odd` the new midpoints.
    let mut inner = alloc::vec![C64::new(0.0, 0.0); len];
    let mut odd = alloc::vec![C64::new(0.0, 0.0); len];
    let h = t / n as f64;
    for k in 1..n {
        let target = if k % 2 == 1 { &mut odd } else { &mut inner };
        prep.accumulate(beta, k as f64 * h, 1.0, target);
    }
    let simpson = |n: usize, inner: &[C64], odd: &[C64]| -> Vec<C64> {
        let h = t / n as f64;
        ends.iter().zip(inner).zip(odd).map(|((e, i), o)| (e + i * 2.0 + o * 4.0) * (h / (3.0 * t))).collect()
    };
    let mut current = simpson(n, &inner, &odd);
    for _ in 0..MAX_HALVINGS {
        for (i, o) in inner.iter_mut().zip(odd.iter_mut()) {
            *i += *o;
            *o = C64::new(0.0, 0.0);
        }
        let n2 = 2 * n;
        let h2 = t / n2 as f64;
        for k in (1..n2).step_by(2) {
            prep.accumulate(beta, k as f64 * h2, 1.0, &mut odd);
        }
        let next = simpson(n2, &inner, &odd);
        let diff: Vec<C64> = next.iter().zip(&current).map(|(a, b)| a - b).collect();
        let change = prep.finish(alg, &diff).norm_inf();
        n = n2;
        current = next;
        if change < quad_tol {
            return Ok(QuadratureResult { value: prep.finish(alg, &current), intervals: n, last_change: change });
        }
        if !change.is_finite() {
            break;
        }
    }
    Err(Error::NumericFailure(format!(
        "Simpson quadrature did not reach tolerance {quad_tol:e} within {MAX_HALVINGS} halvings ({n} intervals, t = {t})"
    )))
}

/// Composite Simpson rule for `B_t(x)` on a fixed grid of `intervals` (rounded up to even).
pub fn besicovitch_reference(
    beta: &BesicovitchFunction,
    flow: &Semigroup,
    x: &Element,
    t: f64,
    intervals: usize,
) -> Result<Element> {
    check_args(t, x, flow)?;
    let n = intervals.max(2) + intervals % 2;
    let prep = Prepared::new(flow, x)?;
    let mut acc = alloc::vec![C64::new(0.0, 0.0); prep.len()];
    let h = t / n as f64;
    for k in 0..=n {
        let w = if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        prep.accumulate(beta, k as f64 * h, w * h / (3.0 * t), &mut acc);
    }
    Ok(prep.finish(x.algebra(), &acc))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BesicovitchCheck {
    /// Whether every estimate in the tail of the grid is below `ε`.
    pub passed: bool,
    /// `(t, (1/t) ∫_0^t |β − p|)` on a geometric grid ending at `t_max`.
    pub estimates: Vec<(f64, f64)>,
}

/// Finite-horizon estimate of `limsup (1/t) ∫_0^t |β(s) − p(s)| ds` with `p` the stored
/// polynomial part. The tail is the last three points of a doubling grid.
pub fn check_besicovitch(beta: &BesicovitchFunction, epsilon: f64, t_max: f64) -> Result<BesicovitchCheck> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(invalid!("t_max must be positive and finite, got {t_max}"));
    }
    let freq = beta.residual.frequency();
    let estimates: Vec<(f64, f64)> = (0..CHECK_POINTS)
        .map(|k| {
            let t = t_max / (1u64 << (CHECK_POINTS - 1 - k)) as f64;
            let n = ((64.0 * t * (1.0 + freq)).ceil() as usize).clamp(1024, 1 << 22);
            let h = t / n as f64;
            let integral: f64 = (0..n).map(|i| beta.residual.eval((i as f64 + 0.5) * h).norm()).sum::<f64>() * h;
            (t, integral / t)
        })
        .collect();
    let passed = estimates[CHECK_POINTS - CHECK_TAIL..].iter().all(|&(_, e)| e < epsilon);
    Ok(BesicovitchCheck { passed, estimates })
}
