//! End-to-end scenario runners. Every runner returns its output files as strings, so
//! writing is serialized and reruns can be compared byte for byte.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use tracial_core::algebra::{lp_norm, submajorizes};
use tracial_core::certify::{
    certify_cauchy_with, extract_limit_with, witness_convergence_with, CertifyOptions, FiniteTrace, Mode, Verdict,
};
use tracial_core::ergodic::{
    besicovitch_average, besicovitch_reference, cesaro_limit_oracle, check_besicovitch, net_average_trace, AverageMode,
    AverageTrace, BesicovitchFunction, CommutingFamily, Residual, Semigroup, TrigPolynomial,
};
use tracial_core::{Element, Projection, Tolerances, C64};

use crate::config::{BesicovitchSpec, ExperimentConfig, FlowSpec, ResidualSpec, Scenario};
use crate::error::{ExitStatus, RunResult};
use crate::formats::{to_json, CertificateJson};
use crate::manifest::Manifest;

/// Named output files and the exit status of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub files: Vec<(String, String)>,
    pub status: ExitStatus,
    pub summary: String,
}

impl Outputs {
    pub fn file(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }
}

pub fn run(cfg: &ExperimentConfig, manifest: &Manifest) -> RunResult<Outputs> {
    match cfg.scenario {
        Scenario::NetAverage => run_net_average(cfg, manifest),
        Scenario::Besicovitch => run_besicovitch(cfg, manifest),
    }
}

#[derive(Serialize)]
struct NetReport<'a> {
    manifest: &'a Manifest,
    reference: &'static str,
    horizon: Vec<usize>,
    final_err_inf: f64,
    sector_constant: Option<f64>,
    limit_modulus: f64,
    limit_submajorized_by_input: bool,
    cauchy: CertificateJson,
    convergence: CertificateJson,
}

fn run_net_average(cfg: &ExperimentConfig, manifest: &Manifest) -> RunResult<Outputs> {
    let alg = cfg.algebra.build()?;
    let x = cfg.element.build(&alg, cfg.seed)?;
    let ops = cfg.operators.iter().map(|m| m.build(&alg, cfg.seed)).collect::<RunResult<Vec<_>>>()?;
    let family = CommutingFamily::with_seed(ops.clone(), cfg.seed, &Tolerances::default())?;
    let net_spec = cfg.net.as_ref().expect("validated");
    let net = net_spec.build(family.len())?;
    let trace = match AverageMode::from(net_spec.mode()) {
        AverageMode::Incremental => net_average_trace(&family, &x, &net, AverageMode::Incremental)?,
        AverageMode::Independent => {
            let averages =
                net.indices().par_iter().map(|n| family.box_average(&x, n)).collect::<Result<Vec<_>, _>>()?;
            AverageTrace {
                indices: net.indices().to_vec(),
                norms_inf: averages.iter().map(Element::norm_inf).collect(),
                averages,
                sector_constant: net.sector_constant(),
            }
        }
    };

    let opts = CertifyOptions { tolerance: cfg.certify.tolerance, ..CertifyOptions::default() };
    let finite = FiniteTrace::new(trace.averages.clone())?;
    let cauchy = certify_cauchy_with(&finite, cfg.certify.epsilon, Mode::Bau, &opts)?;
    let (limit, modulus) = extract_limit_with(&finite, &opts)?;
    let convergence = witness_convergence_with(&finite, &limit, cfg.certify.epsilon, Mode::Au, &opts)?;
    let submajorized = submajorizes(&x, &limit)?;

    let (reference, label) = if ops.iter().all(|op| op.as_conjugation().is_some()) {
        (cesaro_limit_oracle(&ops, &x)?, "cesaro-oracle")
    } else {
        (limit.clone(), "extracted-limit")
    };
    let csv = average_csv(&trace, &reference, cfg.report.p, cfg.certify.tolerance, manifest, label)?;
    let final_err_inf = (trace.averages.last().expect("non-empty net") - &reference).norm_inf();

    let ok = cauchy.verdict == Verdict::Certified && convergence.verdict == Verdict::Certified && submajorized;
    let report = NetReport {
        manifest,
        reference: label,
        horizon: trace.indices.last().cloned().unwrap_or_default(),
        final_err_inf,
        sector_constant: trace.sector_constant,
        limit_modulus: modulus,
        limit_submajorized_by_input: submajorized,
        cauchy: CertificateJson::new(&cauchy),
        convergence: CertificateJson::new(&convergence),
    };
    let summary = format!(
        "net_average: {} indices, final err_inf {final_err_inf:e} against {label}, cauchy {}, convergence {}, x̂ ≺≺ x {submajorized}",
        trace.len(),
        report.cauchy.verdict,
        report.convergence.verdict
    );
    Ok(Outputs {
        files: vec![
            ("average_trace.csv".into(), csv),
            ("certificates.json".into(), to_json(&report)),
            ("manifest.json".into(), to_json(manifest)),
        ],
        status: if ok { ExitStatus::Pass } else { ExitStatus::Refuted },
        summary,
    })
}

/// Columns `alpha,n_1..n_d,err_inf,err_p,tau_deficiency`, where `tau_deficiency` is
/// `τ(χ_(tol,∞)(|A_α(x) − reference|))`.
fn average_csv(
    trace: &AverageTrace,
    reference: &Element,
    p: f64,
    tol: f64,
    manifest: &Manifest,
    label: &str,
) -> RunResult<String> {
    let rows = trace
        .averages
        .par_iter()
        .map(|a| {
            let diff = a - reference;
            let deficiency = Projection::abs_spectral(&diff, |s| s > tol).trace();
            Ok((diff.norm_inf(), lp_norm(&diff, p)?, deficiency))
        })
        .collect::<RunResult<Vec<_>>>()?;
    let d = trace.indices.first().map_or(0, Vec::len);
    let mut s = manifest.csv_header();
    let _ = writeln!(s, "# reference={label} p={p} tol={tol}");
    s.push_str("alpha");
    for i in 1..=d {
        let _ = write!(s, ",n_{i}");
    }
    s.push_str(",err_inf,err_p,tau_deficiency\n");
    for (alpha, (n, (e_inf, e_p, def))) in trace.indices.iter().zip(&rows).enumerate() {
        let _ = write!(s, "{alpha}");
        for k in n {
            let _ = write!(s, ",{k}");
        }
        let _ = writeln!(s, ",{e_inf},{e_p},{def}");
    }
    Ok(s)
}

pub fn besicovitch_function(spec: &BesicovitchSpec) -> RunResult<BesicovitchFunction> {
    let poly = TrigPolynomial::new(
        spec.polynomial.iter().map(|t| (C64::new(t.coefficient[0], t.coefficient[1]), t.frequency)).collect(),
    )?;
    let residual = match spec.residual {
        ResidualSpec::Zero {} => Residual::Zero,
        ResidualSpec::SquareWave { amplitude, frequency } => Residual::SquareWave { amplitude, frequency },
        ResidualSpec::HarmonicDecay { amplitude } => Residual::HarmonicDecay { amplitude },
    };
    Ok(BesicovitchFunction::new(poly, residual)?)
}

/// `(1/t) ∫_0^t e^{iθs} ds`.
pub fn mean_of_exponential(theta: f64, t: f64) -> C64 {
    let a = theta * t;
    if a.abs() < 1e-8 {
        return C64::new(1.0, a / 2.0);
    }
    (C64::from_polar(1.0, a) - C64::new(1.0, 0.0)) / C64::new(0.0, a)
}

#[derive(Serialize)]
struct BesicovitchRow {
    t: f64,
    intervals: usize,
    last_change: f64,
    err_reference: f64,
    err_closed_form: Option<f64>,
}

#[derive(Serialize)]
struct BesicovitchReport<'a> {
    manifest: &'a Manifest,
    quad_tol: f64,
    residual_check_passed: bool,
    residual_estimates: Vec<(f64, f64)>,
    max_err_reference: f64,
    max_err_closed_form: Option<f64>,
    rows: Vec<BesicovitchRow>,
}

fn run_besicovitch(cfg: &ExperimentConfig, manifest: &Manifest) -> RunResult<Outputs> {
    let spec = cfg.besicovitch.as_ref().expect("validated");
    let alg = cfg.algebra.build()?;
    let x = cfg.element.build(&alg, cfg.seed)?;
    let beta = besicovitch_function(spec)?;
    let flow = match &spec.flow {
        FlowSpec::Identity {} => Semigroup::identity(&alg),
        FlowSpec::Unitary { generator } => Semigroup::unitary_flow(generator.build(&alg, cfg.seed)?)?,
        FlowSpec::Interpolation { expectation } => Semigroup::interpolation_flow(expectation.build(&alg, cfg.seed)?)?,
    };
    let closed_form = matches!(spec.flow, FlowSpec::Identity {}) && matches!(spec.residual, ResidualSpec::Zero {});
    let rows = spec
        .times
        .par_iter()
        .map(|&t| {
            let q = besicovitch_average(&beta, &flow, &x, t, spec.quad_tol)?;
            let reference = besicovitch_reference(&beta, &flow, &x, t, 2 * q.intervals)?;
            let err_closed_form = closed_form.then(|| {
                let mean: C64 = spec
                    .polynomial
                    .iter()
                    .map(|term| {
                        C64::new(term.coefficient[0], term.coefficient[1]) * mean_of_exponential(term.frequency, t)
                    })
                    .sum();
                (&q.value - &x.scale(mean)).norm_inf()
            });
            Ok(BesicovitchRow {
                t,
                intervals: q.intervals,
                last_change: q.last_change,
                err_reference: (&q.value - &reference).norm_inf(),
                err_closed_form,
            })
        })
        .collect::<RunResult<Vec<_>>>()?;
    let t_max = spec.times.iter().copied().fold(0.0, f64::max);
    let check = check_besicovitch(&beta, cfg.certify.epsilon, t_max)?;
    let max_err_reference = rows.iter().map(|r| r.err_reference).fold(0.0, f64::max);
    let max_err_closed_form = closed_form.then(|| rows.iter().filter_map(|r| r.err_closed_form).fold(0.0, f64::max));
    let ok =
        check.passed && max_err_reference <= spec.quad_tol && max_err_closed_form.is_none_or(|e| e <= spec.quad_tol);

    let mut csv = manifest.csv_header();
    let _ = writeln!(csv, "# quad_tol={}", spec.quad_tol);
    csv.push_str("t,intervals,last_change,err_reference,err_closed_form\n");
    for r in &rows {
        let closed = r.err_closed_form.map(|e| e.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{},{},{},{},{closed}", r.t, r.intervals, r.last_change, r.err_reference);
    }
    let summary = format!(
        "besicovitch: {} times, max err against half-step reference {max_err_reference:e}, closed form {}, residual check {}",
        rows.len(),
        max_err_closed_form.map_or("n/a".to_string(), |e| format!("{e:e}")),
        check.passed
    );
    let report = BesicovitchReport {
        manifest,
        quad_tol: spec.quad_tol,
        residual_check_passed: check.passed,
        residual_estimates: check.estimates,
        max_err_reference,
        max_err_closed_form,
        rows,
    };
    Ok(Outputs {
        files: vec![
            ("besicovitch.csv".into(), csv),
            ("certificates.json".into(), to_json(&report)),
            ("manifest.json".into(), to_json(manifest)),
        ],
        status: if ok { ExitStatus::Pass } else { ExitStatus::Refuted },
        summary,
    })
}
