//! Subcommands. Each `cmd_*` returns the files it produced as strings together with
//! an exit status; [`run`] writes them under the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tracial_core::algebra::{lp_norm, mu};
use tracial_core::certify::{
    bilateral_to_onesided, certify_cauchy_with, extract_limit_with, remark32_model, witness_convergence_with,
    CertifyOptions, FiniteTrace, Mode, Verdict, WitnessCertificate,
};
use tracial_core::rng::{random_element, stream};
use tracial_core::superops::{audit_submajorization, verify_ds_with, DsRequest, DEFAULT_TRIALS};
use tracial_core::{Error as CoreError, Tolerances};

use crate::config::ExperimentConfig;
use crate::error::{ExitStatus, RunError, RunResult};
use crate::formats::{tail_csv, to_json, CertificateJson, DsCertificateJson, ElementFile, MapFile, TraceFile};
use crate::manifest::Manifest;
use crate::scenario::{self, Outputs};

#[derive(Debug, Parser)]
#[command(name = "tracial", version, about = "Ergodic averages and convergence certificates on finite traced algebras")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Experiment configuration (TOML, or JSON by extension).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Verdict tolerance for certificates; overrides the configuration.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Au,
    Bau,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Au => Mode::Au,
            ModeArg::Bau => Mode::Bau,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Singular value function of an element as CSV, with a norms summary.
    Mu {
        input: PathBuf,
        /// CSV path; defaults to `<out-dir>/mu.csv`.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Dunford–Schwartz certificate of a map.
    DsCheck {
        map: PathBuf,
        /// Exact bounds from A(1) and A†(1); requires positivity.
        #[arg(long, conflicts_with = "trials")]
        exact_positive: bool,
        /// Sampled inputs for maps without structural positivity.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Run an experiment configuration end to end.
    Average { config: Option<PathBuf> },
    /// Certify a trace directory (`trace.json`).
    Certify {
        trace_dir: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Candidate limit; extracted from the trace when absent.
        #[arg(long)]
        limit: Option<PathBuf>,
    },
    /// Write the commutative counterexample trace of length N.
    Remark32 {
        #[arg(long)]
        n: usize,
    },
}

fn read(path: &Path) -> RunResult<Vec<u8>> {
    fs::read(path).map_err(|e| RunError::input(format!("cannot read {}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path, bytes: &[u8]) -> RunResult<T> {
    serde_json::from_slice(bytes).map_err(|e| RunError::input(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct NormsSummary {
    support_end: f64,
    l1: f64,
    l2: f64,
    linf: f64,
    manifest: Manifest,
}

pub fn cmd_mu(input: &Path, seed: u64) -> RunResult<Outputs> {
    let bytes = read(input)?;
    let x = parse_json::<ElementFile>(input, &bytes)?.build()?;
    let manifest = Manifest::new(&bytes, seed);
    let f = mu(&x)?;
    let norms = NormsSummary {
        support_end: f.support_end(),
        l1: lp_norm(&x, 1.0)?,
        l2: lp_norm(&x, 2.0)?,
        linf: x.norm_inf(),
        manifest: manifest.clone(),
    };
    Ok(Outputs {
        summary: format!("mu: {} steps, ‖x‖_1 = {}, ‖x‖_∞ = {}", f.values().len(), norms.l1, norms.linf),
        files: vec![("mu.csv".into(), crate::formats::step_csv(&f, &manifest)), ("norms.json".into(), to_json(&norms))],
        status: ExitStatus::Pass,
    })
}

pub fn cmd_ds_check(map: &Path, exact_positive: bool, trials: Option<usize>, seed: u64) -> RunResult<Outputs> {
    let bytes = read(map)?;
    let file: MapFile = parse_json(map, &bytes)?;
    let alg = file.algebra.build()?;
    let op = file.map.build(&alg, seed)?;
    let request = if exact_positive { DsRequest::ExactPositive } else { DsRequest::Auto };
    let cert = verify_ds_with(&op, request, trials.unwrap_or(DEFAULT_TRIALS), seed, &Tolerances::default());
    if exact_positive && !cert.positivity {
        return Err(RunError::input("--exact-positive requested for a map that is not positive"));
    }
    let audit = if cert.is_ds {
        let x = random_element(&mut stream(seed, "audit"), &alg);
        Some(audit_submajorization(&op, &x)?)
    } else {
        None
    };
    let json = DsCertificateJson::new(&cert, audit, Manifest::new(&bytes, seed));
    let pass = cert.is_ds && audit != Some(false);
    Ok(Outputs {
        summary: format!(
            "ds-check: c_1 = {}, c_∞ = {}, method {}, {}",
            json.one_norm_bound,
            json.sup_norm_bound,
            json.method,
            if pass { "DS" } else { "not DS" }
        ),
        files: vec![("ds_certificate.json".into(), to_json(&json))],
        status: if pass { ExitStatus::Pass } else { ExitStatus::Refuted },
    })
}

pub fn cmd_average(config: &Path, seed: Option<u64>, tol: Option<f64>) -> RunResult<Outputs> {
    let bytes = read(config)?;
    let text = String::from_utf8(bytes.clone()).map_err(|_| RunError::input("configuration is not UTF-8"))?;
    let mut cfg = ExperimentConfig::parse(config, &text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = tol {
        cfg.certify.tolerance = t;
        cfg.validate()?;
    }
    scenario::run(&cfg, &Manifest::new(&bytes, cfg.seed))
}

#[derive(Serialize)]
struct NamedCertificate {
    role: &'static str,
    #[serde(flatten)]
    certificate: CertificateJson,
}

#[derive(Serialize)]
struct CertifyReport {
    manifest: Manifest,
    limit_source: &'static str,
    limit_modulus: Option<f64>,
    certificates: Vec<NamedCertificate>,
}

pub fn cmd_certify(
    trace_dir: &Path,
    epsilon: f64,
    mode: Mode,
    limit: Option<&Path>,
    seed: u64,
    tol: Option<f64>,
) -> RunResult<Outputs> {
    let trace_path = trace_dir.join("trace.json");
    let mut bytes = read(&trace_path)?;
    let trace = FiniteTrace::new(parse_json::<TraceFile>(&trace_path, &bytes)?.build()?)?;
    let mut opts = CertifyOptions::default();
    if let Some(t) = tol {
        opts.tolerance = t;
    }
    let (limit, source, modulus) = match limit {
        Some(path) => {
            let lb = read(path)?;
            let x = parse_json::<ElementFile>(path, &lb)?.build()?;
            bytes.extend_from_slice(&lb);
            (x, "file", None)
        }
        None => match extract_limit_with(&trace, &opts) {
            Ok((x, m)) => (x, "extracted", Some(m)),
            Err(CoreError::NoLimit(msg)) => return Err(RunError::refuted(format!("no-limit: {msg}"))),
            Err(e) => return Err(e.into()),
        },
    };
    let manifest = Manifest::new(&bytes, seed);

    let mut primary: Vec<(&'static str, WitnessCertificate)> = Vec::new();
    if source == "extracted" {
        primary.push(("cauchy", certify_cauchy_with(&trace, epsilon, mode, &opts)?));
    }
    let convergence = witness_convergence_with(&trace, &limit, epsilon, mode, &opts)?;
    let upgrade = match mode {
        Mode::Bau => Some(bilateral_to_onesided(&trace, &convergence)?),
        Mode::Au => None,
    };
    primary.push(("convergence", convergence));
    let pass = primary.iter().all(|(_, c)| c.verdict == Verdict::Certified);
    let tail = tail_csv(&primary.last().expect("convergence certificate").1, &manifest);

    let mut certificates: Vec<NamedCertificate> =
        primary.iter().map(|(role, c)| NamedCertificate { role, certificate: CertificateJson::new(c) }).collect();
    if let Some(u) = &upgrade {
        certificates.push(NamedCertificate { role: "onesided-upgrade", certificate: CertificateJson::new(u) });
    }
    let summary = certificates
        .iter()
        .map(|c| {
            format!(
                "{}: {} (τ(e⊥) = {}, final bound {})",
                c.role, c.certificate.verdict, c.certificate.trace_deficiency, c.certificate.final_bound
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    let report = CertifyReport { manifest, limit_source: source, limit_modulus: modulus, certificates };
    Ok(Outputs {
        files: vec![("certificate.json".into(), to_json(&report)), ("tail.csv".into(), tail)],
        status: if pass { ExitStatus::Pass } else { ExitStatus::Refuted },
        summary,
    })
}

pub fn cmd_remark32(n: usize, seed: u64) -> RunResult<Outputs> {
    if n == 0 {
        return Err(RunError::input("--n must be at least 1"));
    }
    let (_, trace, limit) = remark32_model(n)?;
    let manifest = Manifest::new(format!("remark32 n={n}").as_bytes(), seed);
    let mut csv = manifest.csv_header();
    csv.push_str("n,l1_norm\n");
    for (k, f) in trace.elements().iter().enumerate() {
        csv.push_str(&format!("{},{}\n", k + 1, lp_norm(f, 1.0)?));
    }
    Ok(Outputs {
        summary: format!("remark32: N = {n}, ‖f‖_1 = {}", lp_norm(&limit, 1.0)?),
        files: vec![
            ("trace.json".into(), to_json(&TraceFile::of(trace.elements())?)),
            ("limit.json".into(), to_json(&ElementFile::of(&limit))),
            ("norms.csv".into(), csv),
            ("manifest.json".into(), to_json(&manifest)),
        ],
        status: ExitStatus::Pass,
    })
}

/// Writes outputs in order; `rename` maps a default file name to an explicit path.
pub fn write_outputs(out_dir: &Path, outputs: &Outputs, rename: &[(&str, &Path)]) -> RunResult<()> {
    fs::create_dir_all(out_dir)?;
    for (name, contents) in &outputs.files {
        let path = match rename.iter().find(|(n, _)| n == name) {
            Some((_, p)) => p.to_path_buf(),
            None => out_dir.join(name),
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, contents)?;
    }
    Ok(())
}

/// Executes a parsed command line and returns the exit status.
pub fn run(cli: Cli) -> RunResult<ExitStatus> {
    let g = &cli.global;
    if let Some(n) = g.threads {
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let seed = g.seed.unwrap_or(0);
    let (outputs, rename): (Outputs, Vec<(&str, PathBuf)>) = match &cli.command {
        Command::Mu { input, output } => {
            let out = cmd_mu(input, seed)?;
            let rename = output
                .iter()
                .flat_map(|csv| {
                    let norms = csv.with_file_name("norms.json");
                    [("mu.csv", csv.clone()), ("norms.json", norms)]
                })
                .collect();
            (out, rename)
        }
        Command::DsCheck { map, exact_positive, trials } => {
            (cmd_ds_check(map, *exact_positive, *trials, seed)?, Vec::new())
        }
        Command::Average { config } => {
            let path = config
                .as_ref()
                .or(g.config.as_ref())
                .ok_or_else(|| RunError::input("average needs a configuration path"))?;
            (cmd_average(path, g.seed, g.tol)?, Vec::new())
        }
        Command::Certify { trace_dir, epsilon, mode, limit } => {
            (cmd_certify(trace_dir, *epsilon, (*mode).into(), limit.as_deref(), seed, g.tol)?, Vec::new())
        }
        Command::Remark32 { n } => (cmd_remark32(*n, seed)?, Vec::new()),
    };
    let rename: Vec<(&str, &Path)> = rename.iter().map(|(n, p)| (*n, p.as_path())).collect();
    write_outputs(&g.out_dir, &outputs, &rename)?;
    println!("{}", outputs.summary);
    Ok(outputs.status)
}
