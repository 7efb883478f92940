use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // f64 methods are inherent when std is linked
use num_traits::Float;

use crate::error::invalid;
use crate::Result;

/// Right-continuous non-increasing step function on `[0, ∞)` with compact support.
///
/// Takes the value `values[i]` on `[breakpoints[i], breakpoints[i + 1])` and `0`
/// from `breakpoints[m]` on. Adjacent values are distinct and all are positive.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn zero() -> Self {
        Self { breakpoints: vec![0.0], values: Vec::new() }
    }

    /// Decreasing rearrangement of `(value, width)` pieces. Zero-valued and
    /// zero-width pieces are dropped; equal neighbouring values are merged.
    /// The sort is stable, so ties keep their input order.
    pub fn from_pieces(mut pieces: Vec<(f64, f64)>) -> Result<Self> {
        if pieces.iter().any(|&(v, w)| !(v.is_finite() && w.is_finite()) || v < 0.0 || w < 0.0) {
            return Err(invalid!("step pieces must be finite and non-negative"));
        }
        pieces.retain(|&(v, w)| v > 0.0 && w > 0.0);
        pieces.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut breakpoints = vec![0.0];
        let mut values: Vec<f64> = Vec::new();
        let mut t = 0.0;
        for (v, w) in pieces {
            t += w;
            if values.last() == Some(&v) {
                *breakpoints.last_mut().expect("non-empty") = t;
            } else {
                values.push(v);
                breakpoints.push(t);
            }
        }
        Ok(Self { breakpoints, values })
    }

    /// From explicit breakpoints `0 = t_0 < … < t_m` and values `v_1 ≥ … ≥ v_m ≥ 0`.
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 || breakpoints[0] != 0.0 {
            return Err(invalid!("need m+1 breakpoints starting at 0 for m values"));
        }
        if breakpoints.windows(2).any(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(invalid!("breakpoints must be strictly increasing and finite"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || values.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid!("values must be finite, non-negative and non-increasing"));
        }
        let pieces = breakpoints.windows(2).zip(&values).map(|(w, &v)| (v, w[1] - w[0])).collect();
        Self::from_pieces(pieces)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(start, end, value)` for every step.
    pub fn steps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints.windows(2).zip(&self.values).map(|(w, &v)| (w[0], w[1], v))
    }

    /// End of the support; `0` for the zero function.
    pub fn support_end(&self) -> f64 {
        *self.breakpoints.last().expect("non-empty")
    }

    /// Value at `t`, taking the right limit at breakpoints.
    pub fn eval(&self, t: f64) -> f64 {
        // index of the last breakpoint ≤ t
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        if idx == 0 {
            return self.values.first().copied().unwrap_or(0.0);
        }
        self.values.get(idx - 1).copied().unwrap_or(0.0)
    }

    /// `∫_0^s f(t) dt` (exact; concave and piecewise linear in `s`).
    pub fn integral(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (a, b, v) in self.steps() {
            if s <= a {
                break;
            }
            acc += v * (b.min(s) - a);
        }
        acc
    }

    /// `∫_0^∞ f(t)^p dt`
    pub fn power_integral(&self, p: f64) -> f64 {
        self.steps().map(|(a, b, v)| v.powf(p) * (b - a)).sum()
    }

    /// `true` iff `∫_0^s self ≤ ∫_0^s other + slack · max(1, ∫_0^s other)` for all `s > 0`.
    ///
    /// Both integrals are concave piecewise linear and constant past their supports,
    /// so comparing at the union of breakpoints decides the inequality.
    pub fn is_submajorized_by(&self, other: &Self, slack: f64) -> bool {
        let mut points: Vec<f64> = self.breakpoints.iter().chain(&other.breakpoints).copied().collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        points.into_iter().all(|s| {
            let fx = other.integral(s);
            self.integral(s) <= fx + slack * fx.max(1.0)
        })
    }

    /// `(t, value)` rows: every breakpoint with the value to its right, ending with `(t_m, 0)`.
    pub fn csv_rows(&self) -> Vec<(f64, f64)> {
        self.breakpoints.iter().enumerate().map(|(i, &t)| (t, self.values.get(i).copied().unwrap_or(0.0))).collect()
    }
}
