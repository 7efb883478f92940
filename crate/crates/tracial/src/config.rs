//! Experiment configuration, read from TOML or JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tracial_core::ergodic::{AverageMode, SectorNet};
use tracial_core::rng::{random_element, random_selfadjoint, stream};
use tracial_core::Element;

use crate::error::{RunError, RunResult};
use crate::formats::{element_from_blocks, AlgebraSpec, MapSpec, MatrixRows};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    NetAverage,
    Besicovitch,
}

/// A seeded random element draws from the stream named `stream`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementSpec {
    Random {
        #[serde(default = "element_stream")]
        stream: String,
    },
    RandomSelfadjoint {
        #[serde(default = "element_stream")]
        stream: String,
    },
    Explicit {
        blocks: Vec<MatrixRows>,
    },
}

fn element_stream() -> String {
    "element".to_string()
}

impl ElementSpec {
    pub fn build(&self, alg: &std::sync::Arc<tracial_core::TracedAlgebra>, seed: u64) -> RunResult<Element> {
        Ok(match self {
            ElementSpec::Random { stream: name } => random_element(&mut stream(seed, name), alg),
            ElementSpec::RandomSelfadjoint { stream: name } => random_selfadjoint(&mut stream(seed, name), alg),
            ElementSpec::Explicit { blocks } => element_from_blocks(alg, blocks)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    #[default]
    Incremental,
    Independent,
}

impl From<ModeSpec> for AverageMode {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Incremental => AverageMode::Incremental,
            ModeSpec::Independent => AverageMode::Independent,
        }
    }
}

/// The cofinal sequence of multi-indices the net is evaluated along.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NetSpec {
    /// `(k, …, k)` for `k = 1..=last`.
    Diagonal {
        last: usize,
        #[serde(default)]
        mode: ModeSpec,
    },
    Explicit {
        indices: Vec<Vec<usize>>,
        #[serde(default)]
        c0: Option<f64>,
        #[serde(default)]
        mode: ModeSpec,
    },
}

impl NetSpec {
    pub fn build(&self, dimension: usize) -> RunResult<SectorNet> {
        Ok(match self {
            NetSpec::Diagonal { last, .. } => SectorNet::diagonal(dimension, *last)?,
            NetSpec::Explicit { indices, c0, .. } => SectorNet::new(dimension, indices.clone(), *c0)?,
        })
    }

    pub fn mode(&self) -> ModeSpec {
        match self {
            NetSpec::Diagonal { mode, .. } | NetSpec::Explicit { mode, .. } => *mode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportSpec {
    /// Exponent of the `err_p` column.
    #[serde(default = "two")]
    pub p: f64,
}

impl Default for ReportSpec {
    fn default() -> Self {
        Self { p: 2.0 }
    }
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySpec {
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Level the final tail bounds must fall below.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl Default for CertifySpec {
    fn default() -> Self {
        Self { epsilon: default_epsilon(), tolerance: default_tolerance() }
    }
}

fn default_epsilon() -> f64 {
    0.05
}

fn default_tolerance() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    /// `[re, im]`
    pub coefficient: [f64; 2],
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ResidualSpec {
    Zero {},
    SquareWave { amplitude: f64, frequency: f64 },
    HarmonicDecay { amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowSpec {
    Identity {},
    /// `s ↦ e^{ish} x e^{−ish}` for a selfadjoint generator `h`.
    Unitary {
        generator: ElementSpec,
    },
    /// Interpolation towards a conditional expectation (pinching or block expectation).
    Interpolation {
        expectation: MapSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesicovitchSpec {
    pub polynomial: Vec<TermSpec>,
    #[serde(default = "zero_residual")]
    pub residual: ResidualSpec,
    #[serde(default = "identity_flow")]
    pub flow: FlowSpec,
    pub times: Vec<f64>,
    #[serde(default = "default_quad_tol")]
    pub quad_tol: f64,
}

fn zero_residual() -> ResidualSpec {
    ResidualSpec::Zero {}
}

fn identity_flow() -> FlowSpec {
    FlowSpec::Identity {}
}

fn default_quad_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub seed: u64,
    pub algebra: AlgebraSpec,
    pub element: ElementSpec,
    #[serde(default)]
    pub operators: Vec<MapSpec>,
    #[serde(default)]
    pub net: Option<NetSpec>,
    #[serde(default)]
    pub report: ReportSpec,
    #[serde(default)]
    pub certify: CertifySpec,
    #[serde(default)]
    pub besicovitch: Option<BesicovitchSpec>,
}

impl ExperimentConfig {
    /// Parses by extension: `.json` as JSON, anything else as TOML.
    pub fn parse(path: &Path, text: &str) -> RunResult<Self> {
        let cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(text)?
        } else {
            toml::from_str(text)?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> RunResult<()> {
        match self.scenario {
            Scenario::NetAverage => {
                if self.operators.is_empty() {
                    return Err(RunError::input("net_average needs at least one operator"));
                }
                if self.net.is_none() {
                    return Err(RunError::input("net_average needs a [net] table"));
                }
            }
            Scenario::Besicovitch => {
                let b = self
                    .besicovitch
                    .as_ref()
                    .ok_or_else(|| RunError::input("besicovitch needs a [besicovitch] table"))?;
                if b.times.is_empty() || b.times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                    return Err(RunError::input("times must be positive and finite"));
                }
                if !(b.quad_tol.is_finite() && b.quad_tol > 0.0) {
                    return Err(RunError::input("quad_tol must be positive"));
                }
            }
        }
        if !(self.certify.epsilon > 0.0 && self.certify.tolerance > 0.0) {
            return Err(RunError::input("certify epsilon and tolerance must be positive"));
        }
        if !(self.report.p.is_finite() && self.report.p >= 1.0) {
            return Err(RunError::input("report p must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bundled(name: &str) -> ExperimentConfig {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
        ExperimentConfig::parse(&path, &std::fs::read_to_string(&path).unwrap()).unwrap()
    }

    #[test]
    fn bundled_configs_parse() {
        let c = bundled("conjugation-d2-sector.toml");
        assert_eq!(c.scenario, Scenario::NetAverage);
        assert_eq!(c.operators.len(), 2);
        assert_eq!(c.net.as_ref().unwrap().build(2).unwrap().indices().len(), 10_000);
        assert_eq!(bundled("besicovitch-theta.toml").besicovitch.unwrap().times, [1.0, 10.0, 100.0]);
        for name in ["besicovitch-unitary-flow.toml", "non-commuting.toml", "pinching-mixture.toml"] {
            bundled(name);
        }
    }

    #[test]
    fn seeds_are_mandatory_and_keys_checked() {
        let base = "scenario = \"net_average\"\nalgebra = { blocks = [{ dim = 2, weight = 1.0 }] }\nelement = { kind = \"random\" }\noperators = [{ kind = \"identity\" }]\nnet = { kind = \"diagonal\", last = 3 }\n";
        let p = Path::new("c.toml");
        assert!(ExperimentConfig::parse(p, base).is_err());
        assert!(ExperimentConfig::parse(p, &format!("seed = 1\n{base}")).is_ok());
        assert!(ExperimentConfig::parse(p, &format!("seed = 1\ncolour = 2\n{base}")).is_err());
        let no_ops = format!("seed = 1\n{}", base.replace("operators = [{ kind = \"identity\" }]\n", ""));
        assert!(ExperimentConfig::parse(p, &no_ops).is_err());
    }

    #[test]
    fn json_configs_and_validation() {
        let json = r#"{"scenario": "besicovitch", "seed": 2, "algebra": {"blocks": [{"dim": 1, "weight": 1.0}]},
            "element": {"kind": "explicit", "blocks": [[[2.0]]]},
            "besicovitch": {"polynomial": [{"coefficient": [1.0, 0.0], "frequency": 0.0}], "times": [1.0]}}"#;
        let c = ExperimentConfig::parse(Path::new("c.json"), json).unwrap();
        assert_eq!(c.besicovitch.as_ref().unwrap().quad_tol, 1e-6);
        let alg = c.algebra.build().unwrap();
        assert_eq!(c.element.build(&alg, 0).unwrap().block(0)[(0, 0)].re, 2.0);
        let bad = json.replace("\"times\": [1.0]", "\"times\": [-1.0]");
        assert!(ExperimentConfig::parse(Path::new("c.json"), &bad).is_err());
    }
}
