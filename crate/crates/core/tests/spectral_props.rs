//! Singular-value functions against an independent SVD, and the algebraic
//! properties of `μ`, the K-functional, the measure topology and spectral splits.

mod common;

use std::sync::Arc;

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use tracial_core::algebra::{
    clip_decompose, enlarge_projection, fava_decompose, k_functional, lp_norm, measure_metric, mu, submajorizes,
    trace_lp_norm,
};
use tracial_core::rng::{random_algebra, random_element, random_projection, random_selfadjoint, stream, StreamRng};
use tracial_core::{Element, C64};

fn setup(seed: u64) -> (StreamRng, Arc<tracial_core::TracedAlgebra>) {
    let mut rng = stream(seed, "spectral-props");
    let alg = random_algebra(&mut rng, 4, 6);
    (rng, alg)
}

/// `(σ, width)` pairs from nalgebra's SVD, sorted descending.
fn oracle_pieces(x: &Element) -> Vec<(f64, f64)> {
    let mut pieces = Vec::new();
    for (m, b) in x.blocks().iter().zip(x.algebra().blocks()) {
        let n = m.dim();
        let dm = DMatrix::from_fn(n, n, |i, j| m[(i, j)]);
        for s in dm.svd(false, false).singular_values.iter() {
            pieces.push((*s, b.weight));
        }
    }
    pieces.sort_by(|a, b| b.0.total_cmp(&a.0));
    pieces
}

fn oracle_mu(pieces: &[(f64, f64)], t: f64) -> f64 {
    let mut acc = 0.0;
    for &(s, w) in pieces {
        acc += w;
        if t < acc {
            return s;
        }
    }
    0.0
}

proptest! {
    #![proptest_config(common::config(200))]

    #[test]
    fn mu_matches_svd_oracle(seed in any::<u64>()) {
        let (mut rng, alg) = setup(seed);
        let x = random_element(&mut rng, &alg);
        let f = mu(&x).unwrap();
        let pieces = oracle_pieces(&x);
        let total = alg.total_trace();
        for k in 0..64 {
            let t = total * k as f64 / 64.0;
            prop_assert!((f.eval(t) - oracle_mu(&pieces, t)).abs() <= 1e-9 * (1.0 + pieces[0].0));
        }
        // Breakpoints themselves (right-continuity).
        let mut acc = 0.0;
        for &(_, w) in &pieces {
            acc += w;
            prop_assert!((f.eval(acc) - oracle_mu(&pieces, acc)).abs() <= 1e-9 * (1.0 + pieces[0].0));
        }
    }

    #[test]
    fn lp_routes_agree(seed in any::<u64>()) {
        let (mut rng, alg) = setup(seed);
        let x = random_element(&mut rng, &alg);
        for p in [1.0, 2.0, 3.0] {
            let a = lp_norm(&x, p).unwrap();
            let b = trace_lp_norm(&x, p).unwrap();
            prop_assert!((a - b).abs() <= 1e-9 * a.max(b));
        }
    }

    #[test]
    fn mu_symmetries(seed in any::<u64>()) {
        let (mut rng, alg) = setup(seed);
        let x = random_element(&mut rng, &alg);
        let c = C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let f = mu(&x).unwrap();
        let fs = mu(&x.adjoint()).unwrap();
        let fa = mu(&x.abs()).unwrap();
        let fc = mu(&x.scale(c)).unwrap();
        let total = alg.total_trace();
        let scale = 1e-9 * (1.0 + f.eval(0.0));
        let mut prev = f64::INFINITY;
        for k in 0..=80 {
            let t = total * k as f64 / 80.0;
            let v = f.eval(t);
            prop_assert!(v <= prev);
            prev = v;
            prop_assert!((fs.eval(t) - v).abs() <= scale);
            prop_assert!((fa.eval(t) - v).abs() <= scale);
            prop_assert!((fc.eval(t) - c.norm() * v).abs() <= scale * (1.0 + c.norm()));
        }
        // Right-continuity at every breakpoint.
        for (&b, &v) in f.breakpoints().iter().zip(f.values()) {
            prop_assert_eq!(f.eval(b), v);
        }
    }

    #[test]
    fn mu_subadditive(seed in any::<u64>()) {
        let (mut rng, alg) = setup(seed);
        let x = random_element(&mut rng, &alg);
        let y = random_element(&mut rng, &alg);
        let (fx, fy, fxy) = (mu(&x).unwrap(), mu(&y).unwrap(), mu(&(&x + &y)).unwrap());
        let total = alg.total_trace();
        for _ in 0..20 {
            let t = rng.random_range(0.0..total);
            let s = rng.random_range(0.0..total);
            prop_assert!(fxy.eval(t + s) <= fx.eval(t) + fy.eval(s) + 1e-9);
        }
    }

    #[test]
    fn k_functional_is_optimal_clip(seed in any::<u64>()) {
        let (mut rng, alg) = setup(seed);
        let x = random_element(&mut rng, &alg);
        let f = mu(&x).unwrap();
        let total = alg.total_trace();
        for _ in 0..5 {
            let s = rng.random_range(0.01..total * 1.2);
            let k = k_functional(&x, s).unwrap();
            let value = |level: f64| {
                let (y, z) = clip_decompose(&x, level).unwrap();
                lp_norm(&y, 1.0).unwrap() + s * z.norm_inf()
            };
            let m = f.eval(s);
            prop_assert!((k - value(m)).abs() <= 1e-9 * (1.0 + k));
            for _ in 0..20 {
                let level = rng.random_range(0.0..f.eval(0.0) * 1.5);
                prop_assert!(k <= value(level) + 1e-9 * (1.0 + k));
            }
        }
    }

    #[test]
    fn submajorization_reflexive_and_scaling(seed in any::<u64>()) {
        let (mut rng, alg) = setup(seed);
        let x = random_element(&mut rng, &alg);
        let c: f64 = rng.random_range(0.0..1.0);
        prop_assert!(submajorizes(&x, &x).unwrap());
        prop_assert!(submajorizes(&x, &x.scale_real(c)).unwrap());
        prop_assert!(submajorizes(&x, &x.scale(C64::from_polar(c, 1.3))).unwrap());
    }

    #[test]
    fn projection_enlargement(seed in any::<u64>()) {
        let (mut rng, alg) = setup(seed);
        let x = random_element(&mut rng, &alg);
        let e = random_projection(&mut rng, &alg);
        let f = enlarge_projection(&x, &e).unwrap();
        let exe = (&(e.as_element() * &x) * e.as_element()).norm_inf();
        prop_assert!(f.deficiency() <= 2.0 * e.deficiency() + 1e-9);
        prop_assert!((&x * f.as_element()).norm_inf() <= exe + 1e-9);
    }

    #[test]
    fn spectral_split(seed in any::<u64>()) {
        let (mut rng, alg) = setup(seed);
        let x = random_selfadjoint(&mut rng, &alg);
        let delta = rng.random_range(0.05..4.0);
        let s = fava_decompose(&x, delta).unwrap();
        prop_assert!((&(&s.large + &s.small) - &x).max_abs_entry() <= 1e-12 * (1.0 + x.max_abs_entry()));
        prop_assert!(s.small.norm_inf() <= delta);
        let expected: f64 = x
            .blocks()
            .iter()
            .zip(alg.blocks())
            .map(|(m, b)| {
                let dm = DMatrix::from_fn(m.dim(), m.dim(), |i, j| m[(i, j)]);
                b.weight * dm.svd(false, false).singular_values.iter().filter(|&&s| s > delta).count() as f64
            })
            .sum();
        prop_assert_eq!(s.large_support_trace, expected);
    }

    #[test]
    fn measure_metric_is_symmetric_and_bounded(seed in any::<u64>()) {
        let (mut rng, alg) = setup(seed);
        let x = random_element(&mut rng, &alg);
        let y = random_element(&mut rng, &alg);
        let d = measure_metric(&x, &y).unwrap();
        prop_assert_eq!(d, measure_metric(&y, &x).unwrap());
        prop_assert!(d <= alg.total_trace());
        prop_assert!(d <= (&x - &y).norm_inf() + 1e-12);
        prop_assert_eq!(measure_metric(&x, &x).unwrap(), 0.0);
    }
}
