//! JSON schemas for algebras, elements, maps and certificates, and CSV writers.
//!
//! Matrices are written row-major as lists of rows; an entry is either a real
//! number or a `[re, im]` pair. Output always uses the pair form.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tracial_core::algebra::StepFunction;
use tracial_core::certify::{DifferenceBasis, Mode, Verdict, Witness, WitnessCertificate};
use tracial_core::rng::{stream, unitary_matrix};
use tracial_core::superops::{DsCertificate, DsMethod, SuperOperator};
use tracial_core::{CMatrix, Element, Projection, TracedAlgebra, C64};

use crate::error::{RunError, RunResult};
use crate::manifest::Manifest;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn value(self) -> C64 {
        match self {
            Entry::Real(r) => C64::new(r, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

impl From<C64> for Entry {
    fn from(z: C64) -> Self {
        Entry::Complex([z.re, z.im])
    }
}

pub type MatrixRows = Vec<Vec<Entry>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub dim: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub blocks: Vec<BlockSpec>,
}

impl AlgebraSpec {
    pub fn build(&self) -> RunResult<Arc<TracedAlgebra>> {
        let blocks: Vec<(usize, f64)> = self.blocks.iter().map(|b| (b.dim, b.weight)).collect();
        Ok(Arc::new(TracedAlgebra::new(&blocks)?))
    }

    pub fn of(algebra: &TracedAlgebra) -> Self {
        Self { blocks: algebra.blocks().iter().map(|b| BlockSpec { dim: b.dim, weight: b.weight }).collect() }
    }
}

pub fn matrix_from_rows(rows: &MatrixRows) -> RunResult<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(RunError::input(format!("matrix with {n} rows is not square")));
    }
    let data = rows.iter().flatten().map(|e| e.value()).collect();
    CMatrix::from_row_major(n, data).ok_or_else(|| RunError::input("matrix shape"))
}

pub fn rows_of(m: &CMatrix) -> MatrixRows {
    let n = m.dim();
    m.as_slice().chunks(n.max(1)).take(n).map(|r| r.iter().map(|&z| z.into()).collect()).collect()
}

/// Block matrices of an element, without the algebra.
pub fn element_from_blocks(algebra: &Arc<TracedAlgebra>, blocks: &[MatrixRows]) -> RunResult<Element> {
    let mats = blocks.iter().map(matrix_from_rows).collect::<RunResult<Vec<_>>>()?;
    Ok(Element::from_blocks(algebra.clone(), mats)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementFile {
    pub algebra: AlgebraSpec,
    pub blocks: Vec<MatrixRows>,
}

impl ElementFile {
    pub fn of(x: &Element) -> Self {
        Self { algebra: AlgebraSpec::of(x.algebra()), blocks: x.blocks().iter().map(rows_of).collect() }
    }

    pub fn build(&self) -> RunResult<Element> {
        let alg = self.algebra.build()?;
        element_from_blocks(&alg, &self.blocks)
    }
}

/// A finite trace on disk: `trace.json` in a trace directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    pub algebra: AlgebraSpec,
    pub elements: Vec<Vec<MatrixRows>>,
}

impl TraceFile {
    pub fn of(elements: &[Element]) -> RunResult<Self> {
        let first = elements.first().ok_or_else(|| RunError::input("empty trace"))?;
        Ok(Self {
            algebra: AlgebraSpec::of(first.algebra()),
            elements: elements.iter().map(|x| x.blocks().iter().map(rows_of).collect()).collect(),
        })
    }

    pub fn build(&self) -> RunResult<Vec<Element>> {
        let alg = self.algebra.build()?;
        self.elements.iter().map(|b| element_from_blocks(&alg, b)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedMap {
    pub weight: f64,
    pub map: MapSpec,
}

/// Superoperator description. Phases are `2π·phase/period` radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Identity {},
    UnitaryConjugation {
        blocks: Vec<MatrixRows>,
    },
    /// Conjugation by `W diag(e^{iφ}) W*`, with `W` a seeded random unitary per block drawn
    /// from the named stream, or the identity when no stream is given.
    DiagonalUnitaryConjugation {
        phases: Vec<Vec<f64>>,
        #[serde(default = "one")]
        period: f64,
        #[serde(default)]
        basis_stream: Option<String>,
    },
    /// Pinching by projections given as block matrices.
    Pinching {
        projections: Vec<Vec<MatrixRows>>,
    },
    DiagonalPinching {},
    BlockDiagonalExpectation {
        labels: Vec<Vec<usize>>,
    },
    ConvexCombination {
        terms: Vec<WeightedMap>,
    },
    /// The first map is applied first.
    Composition {
        maps: Vec<MapSpec>,
    },
    /// `D×D` matrix on vectorized elements, row-major.
    Explicit {
        matrix: MatrixRows,
    },
    /// Blockwise transpose, as an explicit matrix.
    Transpose {},
    /// `c·x` as an explicit matrix.
    Scaled {
        factor: f64,
    },
    Power {
        base: Box<MapSpec>,
        exponent: u32,
    },
}

fn one() -> f64 {
    1.0
}

impl MapSpec {
    /// Builds the operator; random bases draw from `seed`.
    pub fn build(&self, alg: &Arc<TracedAlgebra>, seed: u64) -> RunResult<SuperOperator> {
        Ok(match self {
            MapSpec::Identity {} => SuperOperator::identity(alg),
            MapSpec::UnitaryConjugation { blocks } => {
                SuperOperator::unitary_conjugation(element_from_blocks(alg, blocks)?)?
            }
            MapSpec::DiagonalUnitaryConjugation { phases, period, basis_stream } => {
                if phases.len() != alg.num_blocks() {
                    return Err(RunError::input(format!(
                        "{} phase lists for {} blocks",
                        phases.len(),
                        alg.num_blocks()
                    )));
                }
                if !(*period > 0.0 && period.is_finite()) {
                    return Err(RunError::input("phase period must be positive"));
                }
                let mut rng = basis_stream.as_ref().map(|name| stream(seed, name));
                let mut blocks = Vec::with_capacity(phases.len());
                for (p, b) in phases.iter().zip(alg.blocks()) {
                    if p.len() != b.dim {
                        return Err(RunError::input(format!("{} phases for a block of dimension {}", p.len(), b.dim)));
                    }
                    let diag: Vec<C64> =
                        p.iter().map(|&t| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * t / period)).collect();
                    let d = CMatrix::from_diag(&diag);
                    blocks.push(match rng.as_mut() {
                        Some(r) => d.conjugate_by(&unitary_matrix(r, b.dim)),
                        None => d,
                    });
                }
                SuperOperator::unitary_conjugation(Element::from_blocks(alg.clone(), blocks)?)?
            }
            MapSpec::Pinching { projections } => {
                let ps = projections
                    .iter()
                    .map(|b| Ok(Projection::from_element(&element_from_blocks(alg, b)?, 1e-10)?))
                    .collect::<RunResult<Vec<_>>>()?;
                SuperOperator::pinching(ps)?
            }
            MapSpec::DiagonalPinching {} => SuperOperator::diagonal_pinching(alg),
            MapSpec::BlockDiagonalExpectation { labels } => {
                SuperOperator::block_diagonal_expectation(alg, labels.clone())?
            }
            MapSpec::ConvexCombination { terms } => SuperOperator::convex_combination(
                terms.iter().map(|t| Ok((t.weight, t.map.build(alg, seed)?))).collect::<RunResult<Vec<_>>>()?,
            )?,
            MapSpec::Composition { maps } => {
                SuperOperator::composition(maps.iter().map(|m| m.build(alg, seed)).collect::<RunResult<Vec<_>>>()?)?
            }
            MapSpec::Explicit { matrix } => SuperOperator::explicit(alg, matrix_from_rows(matrix)?)?,
            MapSpec::Transpose {} => SuperOperator::from_linear_fn(alg, |x| {
                Element::from_blocks(x.algebra().clone(), x.blocks().iter().map(CMatrix::transpose).collect())
                    .expect("transpose keeps shapes")
            })?,
            MapSpec::Scaled { factor } => {
                let f = *factor;
                SuperOperator::from_linear_fn(alg, move |x| x.scale_real(f))?
            }
            MapSpec::Power { base, exponent } => SuperOperator::power(base.build(alg, seed)?, *exponent),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub algebra: AlgebraSpec,
    pub map: MapSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsCertificateJson {
    pub one_norm_bound: f64,
    pub sup_norm_bound: f64,
    pub positivity: bool,
    pub selfadjointness: bool,
    pub method: String,
    pub trials: usize,
    pub is_ds: bool,
    /// `A(x) ≺≺ x` on one seeded element; absent when the map is not DS.
    pub submajorization_audit: Option<bool>,
    pub manifest: Manifest,
}

impl DsCertificateJson {
    pub fn new(c: &DsCertificate, audit: Option<bool>, manifest: Manifest) -> Self {
        Self {
            one_norm_bound: c.one_norm_bound,
            sup_norm_bound: c.sup_norm_bound,
            positivity: c.positivity,
            selfadjointness: c.selfadjointness,
            method: match c.method {
                DsMethod::ExactPositive => "exact-positive",
                DsMethod::Sampled => "sampled",
            }
            .to_string(),
            trials: c.trials,
            is_ds: c.is_ds,
            submajorization_audit: audit,
            manifest,
        }
    }
}

pub fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Au => "au",
        Mode::Bau => "bau",
    }
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Certified => "certified",
        Verdict::RefutedAtHorizon => "refuted-at-horizon",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub mode: String,
    pub epsilon: f64,
    pub trace_deficiency: f64,
    pub degenerate: bool,
    pub horizon: usize,
    pub tolerance: f64,
    pub final_bound: f64,
    pub verdict: String,
    /// `against-limit` or `cauchy-anchored`.
    pub basis: String,
    /// `uniform` or `per-entry`.
    pub witness: String,
    /// Ranks of the witness per block; for per-entry witnesses the smallest total rank.
    pub witness_ranks: Vec<usize>,
    /// The witness projection for uniform witnesses.
    pub projection: Option<Vec<MatrixRows>>,
    pub tail_bounds: Vec<(usize, f64)>,
}

impl CertificateJson {
    pub fn new(c: &WitnessCertificate) -> Self {
        let (witness, ranks, projection) = match &c.witness {
            Witness::Uniform(e) => ("uniform", e.ranks(), Some(e.as_element().blocks().iter().map(rows_of).collect())),
            Witness::PerEntry(fs) => {
                let worst = fs.iter().min_by(|a, b| a.trace().total_cmp(&b.trace()));
                ("per-entry", worst.map(Projection::ranks).unwrap_or_default(), None)
            }
        };
        Self {
            mode: mode_name(c.mode).to_string(),
            epsilon: c.epsilon,
            trace_deficiency: c.trace_deficiency,
            degenerate: c.degenerate,
            horizon: c.horizon,
            tolerance: c.tolerance,
            final_bound: c.final_bound(),
            verdict: verdict_name(c.verdict).to_string(),
            basis: match c.basis {
                DifferenceBasis::AgainstLimit(_) => "against-limit",
                DifferenceBasis::Anchored { .. } => "cauchy-anchored",
            }
            .to_string(),
            witness: witness.to_string(),
            witness_ranks: ranks,
            projection,
            tail_bounds: c.tail_bounds.clone(),
        }
    }

    pub fn certified(&self) -> bool {
        self.verdict == "certified"
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// `t,value` rows of a singular value function.
pub fn step_csv(f: &StepFunction, manifest: &Manifest) -> String {
    let mut s = manifest.csv_header();
    s.push_str("t,value\n");
    for (t, v) in f.csv_rows() {
        let _ = writeln!(s, "{t},{v}");
    }
    s
}

pub fn tail_csv(c: &WitnessCertificate, manifest: &Manifest) -> String {
    let mut s = manifest.csv_header();
    let _ = writeln!(s, "# mode={} epsilon={} verdict={}", mode_name(c.mode), c.epsilon, verdict_name(c.verdict));
    s.push_str("index,bound\n");
    for (i, b) in &c.tail_bounds {
        let _ = writeln!(s, "{i},{b}");
    }
    s
}
