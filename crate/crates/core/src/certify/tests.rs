use super::*;
use crate::rng::{random_element, random_projection, stream};
use crate::C64;
use alloc::vec;

fn scalar_trace(alg: &Arc<TracedAlgebra>, values: impl Iterator<Item = f64>) -> FiniteTrace {
    FiniteTrace::new(values.map(|v| Element::scalar(alg, C64::new(v, 0.0))).collect()).unwrap()
}

#[test]
fn window_layout() {
    assert_eq!(windows(1), vec![(0, 1)]);
    assert_eq!(windows(7), vec![(0, 1), (1, 3), (3, 7)]);
    assert_eq!(windows(8), vec![(0, 1), (1, 3), (3, 8)]);
    assert_eq!(windows(12), vec![(0, 1), (1, 3), (3, 7), (7, 12)]);
    let w = windows(1000);
    assert_eq!(w.last().unwrap().1, 1000);
    assert!(w.windows(2).all(|p| p[0].1 == p[1].0));
}

#[test]
fn harmonic_trace_to_zero() {
    let alg = Arc::new(TracedAlgebra::matrix(2).unwrap());
    let trace = scalar_trace(&alg, (1..=400).map(|n| 1.0 / n as f64));
    let cert = witness_convergence(&trace, &Element::zero(&alg), 0.1, Mode::Au).unwrap();
    match &cert.witness {
        Witness::Uniform(e) => assert!(e.is_identity()),
        _ => panic!("uniform witness expected"),
    }
    for (n, &(i, b)) in cert.tail_bounds.iter().enumerate() {
        assert_eq!(i, n);
        assert!((b - 1.0 / (n + 1) as f64).abs() < 1e-14);
    }
    assert_eq!(cert.verdict, Verdict::Certified);
    assert!(!cert.degenerate);
}

#[test]
fn alternating_trace_is_refuted() {
    let alg = Arc::new(TracedAlgebra::matrix(2).unwrap());
    let trace = scalar_trace(&alg, (0..64).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }));
    for limit in [Element::zero(&alg), Element::identity(&alg), trace.last().clone()] {
        let cert = witness_convergence(&trace, &limit, 0.5, Mode::Bau).unwrap();
        assert_eq!(cert.verdict, Verdict::RefutedAtHorizon);
    }
    let cauchy = certify_cauchy(&trace, 0.5, Mode::Bau).unwrap();
    assert_eq!(cauchy.verdict, Verdict::RefutedAtHorizon);
    assert!(matches!(extract_limit(&trace), Err(Error::NoLimit(_))));
}

#[test]
fn degenerate_budget() {
    let alg = Arc::new(TracedAlgebra::matrix(2).unwrap());
    let trace = scalar_trace(&alg, [1.0, -1.0].into_iter());
    let cert = witness_convergence(&trace, &Element::zero(&alg), 3.0, Mode::Au).unwrap();
    assert!(cert.degenerate);
    assert_eq!(cert.trace_deficiency, 2.0);
    assert!(witness_convergence(&trace, &Element::zero(&alg), 0.0, Mode::Au).is_err());
}

#[test]
fn remark_model_witness() {
    let (alg, trace, limit) = remark32_model(30).unwrap();
    assert_eq!(alg.num_blocks(), 30);
    for (n, f) in trace.elements().iter().enumerate() {
        assert_eq!(crate::algebra::lp_norm(f, 1.0).unwrap(), (n + 1) as f64);
    }
    for m in 1..=10 {
        let eps = (-(m as f64)).exp2();
        let cert = witness_convergence(&trace, &limit, eps, Mode::Au).unwrap();
        assert!(cert.trace_deficiency <= eps + 1e-12);
        let Witness::Uniform(e) = &cert.witness else { panic!() };
        assert_eq!(e.ranks(), (1..=30).map(|k| usize::from(k <= m)).collect::<Vec<_>>());
        for &(idx, b) in &cert.tail_bounds {
            if idx + 1 >= m {
                assert_eq!(b, 0.0, "m = {m}, n = {}", idx + 1);
            }
        }
        assert_eq!(cert.verdict, Verdict::Certified);
    }
    let (_, t1, l1) = remark32_model(1).unwrap();
    assert_eq!(t1.len(), 1);
    assert!((t1.last() - &l1).max_abs_entry() == 0.0);
}

#[test]
fn cauchy_constant_and_decaying() {
    let mut rng = stream(7, "t");
    let alg = crate::rng::random_algebra(&mut rng, 2, 3);
    let x = random_element(&mut rng, &alg);
    let constant = FiniteTrace::new(vec![x.clone(); 20]).unwrap();
    let cert = certify_cauchy(&constant, 0.1, Mode::Bau).unwrap();
    assert!(cert.tail_bounds.iter().all(|t| t.1 == 0.0));
    assert_eq!(cert.verdict, Verdict::Certified);

    let decaying = FiniteTrace::new((1..=2000).map(|n| x.scale_real(1.0 + 1.0 / n as f64)).collect()).unwrap();
    let cert = certify_cauchy(&decaying, 0.1, Mode::Au).unwrap();
    assert_eq!(cert.verdict, Verdict::Certified, "{:?}", cert.tail_bounds);
    assert!(cert.tail_bounds.windows(2).all(|p| p[1].1 <= p[0].1));
    // Tail bounds dominate every pair in the tail.
    let xs = decaying.elements();
    let Witness::Uniform(e) = &cert.witness else { panic!() };
    for &(a, bound) in &cert.tail_bounds {
        for alpha in (a..xs.len()).step_by(97) {
            let d = &(&xs[alpha] - &xs[xs.len() - 1]) * e.as_element();
            assert!(d.norm_inf() <= bound + 1e-12);
        }
    }
}

#[test]
fn cauchy_outlier_is_refuted() {
    let alg = Arc::new(TracedAlgebra::matrix(2).unwrap());
    let mut values: Vec<f64> = vec![1.0; 100];
    values[90] = 5.0;
    let trace = scalar_trace(&alg, values.into_iter());
    let cert = certify_cauchy(&trace, 0.1, Mode::Bau).unwrap();
    assert_eq!(cert.verdict, Verdict::RefutedAtHorizon);
    assert!(cert.tail_bounds.last().unwrap().1 >= 4.0);
}

#[test]
fn bilateral_upgrade() {
    let mut rng = stream(8, "t");
    for _ in 0..10 {
        let alg = crate::rng::random_algebra(&mut rng, 3, 3);
        let limit = random_element(&mut rng, &alg);
        let noise: Vec<Element> = (1..=40)
            .map(|n| {
                let p = random_projection(&mut rng, &alg);
                let r = random_element(&mut rng, &alg);
                &limit + &(&r * p.as_element()).scale_real(1.0 / n as f64)
            })
            .collect();
        let trace = FiniteTrace::new(noise).unwrap();
        let eps = 0.3 * alg.total_trace();
        let bau = witness_convergence(&trace, &limit, eps, Mode::Bau).unwrap();
        let au = bilateral_to_onesided(&trace, &bau).unwrap();
        assert_eq!(au.mode, Mode::Au);
        assert!(au.trace_deficiency <= 2.0 * bau.trace_deficiency + 1e-9);
        for (a, b) in au.entry_bounds.iter().zip(&bau.entry_bounds) {
            assert!(*a <= b + 1e-9);
        }
        let cauchy = certify_cauchy(&trace, eps, Mode::Bau).unwrap();
        let up = bilateral_to_onesided(&trace, &cauchy).unwrap();
        assert_eq!(up.tail_bounds.len(), cauchy.tail_bounds.len());
    }
}

#[test]
fn bilateral_upgrade_trivial_cases() {
    let alg = Arc::new(TracedAlgebra::matrix(3).unwrap());
    let x = Element::identity(&alg);
    let trace = FiniteTrace::new(vec![x.clone(); 5]).unwrap();
    let bau = witness_convergence(&trace, &x, 0.5, Mode::Bau).unwrap();
    let up = bilateral_to_onesided(&trace, &bau).unwrap();
    let Witness::PerEntry(fs) = &up.witness else { panic!() };
    assert!(fs.iter().all(Projection::is_identity));
    assert!(up.entry_bounds.iter().all(|&b| b == 0.0));
    let au = witness_convergence(&trace, &x, 0.5, Mode::Au).unwrap();
    assert!(bilateral_to_onesided(&trace, &au).is_err());
}

#[test]
fn limit_extraction() {
    let alg = Arc::new(TracedAlgebra::new(&[(2, 1.0), (1, 0.5)]).unwrap());
    let mut rng = stream(9, "t");
    let x = random_element(&mut rng, &alg);
    let constant = FiniteTrace::new(vec![x.clone(); 6]).unwrap();
    let (l, m) = extract_limit(&constant).unwrap();
    assert_eq!(m, 0.0);
    assert!((&l - &x).max_abs_entry() == 0.0);

    let n = 30;
    let trace = FiniteTrace::new((1..=n).map(|k| x.scale_real(1.0 - (-(k as f64)).exp2())).collect()).unwrap();
    let opts = CertifyOptions { limit_tail: 1, ..CertifyOptions::default() };
    let (l, m) = extract_limit_with(&trace, &opts).unwrap();
    assert!((&l - trace.last()).max_abs_entry() == 0.0);
    assert!(m <= (-(n as f64)).exp2() * x.norm_inf() * (1.0 + 1e-12));
    let (_, m4) = extract_limit(&trace).unwrap();
    assert!(m4 <= (4.0 - n as f64).exp2() * x.norm_inf());
}

#[test]
fn final_bound_matches_verdict() {
    let alg = Arc::new(TracedAlgebra::matrix(2).unwrap());
    let trace = scalar_trace(&alg, (1..=300).map(|n| 1.0 / n as f64));
    for tol in [0.05, 0.5] {
        let opts = CertifyOptions { tolerance: tol, ..CertifyOptions::default() };
        let cauchy = certify_cauchy_with(&trace, 0.1, Mode::Bau, &opts).unwrap();
        assert_eq!(cauchy.final_bound(), cauchy.tail_bounds.last().unwrap().1);
        assert_eq!(cauchy.verdict == Verdict::Certified, cauchy.final_bound() <= tol);
        let limit = witness_convergence_with(&trace, &Element::zero(&alg), 0.1, Mode::Au, &opts).unwrap();
        assert!(limit.final_bound() <= tol || limit.verdict == Verdict::RefutedAtHorizon);
    }
}
