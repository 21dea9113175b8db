//! Experiment configuration: one JSON document, numerics as decimal strings.
//!
//! ```json
//! {
//!   "n": "1",
//!   "mu": ["1", "sqrt2"],
//!   "points": [{"t": ["0.5", "0.5"]}, {"id": "pole", "z": [["1", "0"], ["0", "0"]]}],
//!   "k_list": ["750", "1500"],
//!   "tau": {"family": "smooth_bump", "a": "0.1", "b": "0.9"},
//!   "quadrature_degree": "60",
//!   "norm_method": "series",
//!   "monte_carlo": {"samples": "200000", "seed": "7"},
//!   "tolerance": "0.02",
//!   "norm_cache": "norms.csv",
//!   "model": {"models": [{"lambda": ["1"], "weight_matrix": [["-1/2"]]}], "samples": "500", "seed": "3"}
//! }
//! ```
//!
//! Weight entries accept a decimal, a rational `p/q`, or `sqrtN` for a
//! positive integer `N`. Matrix entries are a real expression or a
//! `[re, im]` pair.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use num_complex::Complex64;
use serde::Deserialize;

use szego_core::cutoff::{CutoffFamily, CutoffFunction};
use szego_core::lattice::WeightVector;
use szego_core::linalg::HermitianForm;
use szego_core::model::ModelData;
use szego_core::sphere::SpherePoint;

pub const MIN_QUADRATURE_DEGREE: usize = 20;
pub const DEFAULT_QUADRATURE_DEGREE: usize = 60;
pub const DEFAULT_TOLERANCE: f64 = 0.02;
pub const DEFAULT_MODEL_SAMPLES: usize = 500;

/// A real given as a decimal string, `p/q`, or `sqrtN`.
pub fn parse_real(s: &str) -> Result<f64> {
    let s = s.trim();
    let value = if let Some(radicand) = s.strip_prefix("sqrt") {
        let r: u64 = radicand.parse().map_err(|_| anyhow!("bad radicand in {s:?}"))?;
        if r == 0 {
            bail!("radicand must be positive in {s:?}");
        }
        (r as f64).sqrt()
    } else if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| anyhow!("bad numerator in {s:?}"))?;
        let q: i64 = q.trim().parse().map_err(|_| anyhow!("bad denominator in {s:?}"))?;
        if q == 0 {
            bail!("zero denominator in {s:?}");
        }
        p as f64 / q as f64
    } else {
        s.parse::<f64>().map_err(|_| anyhow!("not a decimal number: {s:?}"))?
    };
    if !value.is_finite() {
        bail!("non-finite value {s:?}");
    }
    Ok(value)
}

fn parse_count(s: &str) -> Result<usize> {
    s.trim().parse().map_err(|_| anyhow!("not a nonnegative integer: {s:?}"))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    n: Option<String>,
    mu: Option<Vec<String>>,
    #[serde(default)]
    points: Vec<RawPoint>,
    #[serde(default)]
    k_list: Vec<String>,
    tau: Option<RawTau>,
    quadrature_degree: Option<String>,
    norm_method: Option<String>,
    monte_carlo: Option<RawMonteCarlo>,
    tolerance: Option<String>,
    norm_cache: Option<PathBuf>,
    model: Option<RawModelBlock>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoint {
    id: Option<String>,
    t: Option<Vec<String>>,
    z: Option<Vec<RawEntry>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Real(String),
    Complex([String; 2]),
}

impl RawEntry {
    fn value(&self) -> Result<Complex64> {
        Ok(match self {
            RawEntry::Real(s) => Complex64::new(parse_real(s)?, 0.0),
            RawEntry::Complex([re, im]) => Complex64::new(parse_real(re)?, parse_real(im)?),
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTau {
    family: CutoffFamily,
    a: String,
    b: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMonteCarlo {
    samples: String,
    seed: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModelBlock {
    models: Vec<RawModel>,
    samples: Option<String>,
    seed: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    lambda: Vec<String>,
    weight_matrix: Vec<Vec<RawEntry>>,
}

/// How the norm table is filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethodChoice {
    Series,
    Quadrature,
}

#[derive(Debug, Clone)]
pub struct NamedPoint {
    pub id: String,
    pub point: SpherePoint,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub n: usize,
    pub mu: WeightVector,
    pub points: Vec<NamedPoint>,
    pub k_list: Vec<f64>,
    pub tau: Option<CutoffFunction>,
    pub quadrature_degree: usize,
    pub norm_method: NormMethodChoice,
    pub norm_cache: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
pub struct MonteCarlo {
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct ModelBlock {
    pub models: Vec<ModelData>,
    pub samples: usize,
    pub seed: u64,
}

/// A validated configuration. At least one of `instance` and `model` is present.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub instance: Option<Instance>,
    pub monte_carlo: Option<MonteCarlo>,
    pub tolerance: f64,
    pub model: Option<ModelBlock>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).context("malformed configuration JSON")?;
        let instance = match (&raw.n, &raw.mu) {
            (Some(n), Some(mu)) => Some(parse_instance(&raw, n, mu)?),
            (None, None) => {
                if !raw.points.is_empty() || !raw.k_list.is_empty() || raw.tau.is_some() {
                    bail!("points, k_list and tau need an instance (n and mu)");
                }
                None
            }
            _ => bail!("n and mu must be given together"),
        };
        let monte_carlo = raw
            .monte_carlo
            .as_ref()
            .map(|mc| -> Result<MonteCarlo> {
                let seed = mc.seed.as_deref().ok_or_else(|| anyhow!("monte_carlo requires a seed"))?;
                Ok(MonteCarlo { samples: parse_count(&mc.samples)?, seed: parse_count(seed)? as u64 })
            })
            .transpose()?;
        if let Some(mc) = monte_carlo {
            if mc.samples < 1000 {
                bail!("monte_carlo.samples must be at least 1000");
            }
        }
        let tolerance = raw.tolerance.as_deref().map(parse_real).transpose()?.unwrap_or(DEFAULT_TOLERANCE);
        if tolerance < 0.0 {
            bail!("tolerance must be nonnegative");
        }
        let model = raw.model.as_ref().map(parse_model_block).transpose()?;
        if instance.is_none() && model.is_none() {
            bail!("configuration needs an instance (n, mu) or a model block");
        }
        Ok(Self { instance, monte_carlo, tolerance, model })
    }
}

fn parse_instance(raw: &RawConfig, n: &str, mu: &[String]) -> Result<Instance> {
    let n = parse_count(n)?;
    if n == 0 {
        bail!("n must be at least 1");
    }
    let mu = WeightVector::new(mu.iter().map(|s| parse_real(s)).collect::<Result<_>>()?)?;
    if mu.dim() != 1 && mu.dim() != n + 1 {
        bail!("mu must have 1 or n+1 = {} entries, found {}", n + 1, mu.dim());
    }
    let points = raw
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| parse_point(p, i, n))
        .collect::<Result<Vec<_>>>()?;
    let k_list: Vec<f64> = raw.k_list.iter().map(|s| parse_real(s)).collect::<Result<_>>()?;
    if k_list.iter().any(|k| *k < 0.0) {
        bail!("k_list entries must be nonnegative");
    }
    if k_list.windows(2).any(|w| w[0] >= w[1]) {
        bail!("k_list must be strictly increasing");
    }
    let tau = raw
        .tau
        .as_ref()
        .map(|t| CutoffFunction::new(t.family, parse_real(&t.a)?, parse_real(&t.b)?).map_err(anyhow::Error::from))
        .transpose()?;
    if tau.is_some_and(|t| t.is_indicator()) {
        bail!("tau must be a smooth cutoff; the indicator is only a limit");
    }
    let quadrature_degree =
        raw.quadrature_degree.as_deref().map(parse_count).transpose()?.unwrap_or(DEFAULT_QUADRATURE_DEGREE);
    if quadrature_degree < MIN_QUADRATURE_DEGREE {
        bail!("quadrature_degree must be at least {MIN_QUADRATURE_DEGREE}");
    }
    let norm_method = match raw.norm_method.as_deref() {
        None | Some("series") => NormMethodChoice::Series,
        Some("quadrature") => NormMethodChoice::Quadrature,
        Some(other) => bail!("unknown norm_method {other:?}"),
    };
    Ok(Instance { n, mu, points, k_list, tau, quadrature_degree, norm_method, norm_cache: raw.norm_cache.clone() })
}

fn parse_point(p: &RawPoint, index: usize, n: usize) -> Result<NamedPoint> {
    let id = p.id.clone().unwrap_or_else(|| format!("p{index}"));
    let point = match (&p.t, &p.z) {
        (Some(t), None) => {
            let t: Vec<f64> = t.iter().map(|s| parse_real(s)).collect::<Result<_>>()?;
            if t.len() != n + 1 {
                bail!("point {id}: t needs {} entries", n + 1);
            }
            SpherePoint::from_simplex(&t).with_context(|| format!("point {id}"))?
        }
        (None, Some(z)) => {
            let z: Vec<Complex64> = z.iter().map(RawEntry::value).collect::<Result<_>>()?;
            if z.len() != n + 1 {
                bail!("point {id}: z needs {} entries", n + 1);
            }
            SpherePoint::new(z).with_context(|| format!("point {id}"))?
        }
        _ => bail!("point {id}: give exactly one of t and z"),
    };
    Ok(NamedPoint { id, point })
}

fn parse_model_block(raw: &RawModelBlock) -> Result<ModelBlock> {
    let models = raw
        .models
        .iter()
        .enumerate()
        .map(|(i, m)| -> Result<ModelData> {
            let lambda: Vec<f64> = m.lambda.iter().map(|s| parse_real(s)).collect::<Result<_>>()?;
            let n = lambda.len();
            if m.weight_matrix.len() != n || m.weight_matrix.iter().any(|row| row.len() != n) {
                bail!("model {i}: weight_matrix must be {n} x {n}");
            }
            let entries: Vec<Complex64> =
                m.weight_matrix.iter().flatten().map(RawEntry::value).collect::<Result<_>>()?;
            let w = HermitianForm::new(nalgebra::DMatrix::from_row_slice(n, n, &entries))
                .with_context(|| format!("model {i}"))?;
            ModelData::new(lambda, w).with_context(|| format!("model {i}"))
        })
        .collect::<Result<Vec<_>>>()?;
    let samples = raw.samples.as_deref().map(parse_count).transpose()?.unwrap_or(DEFAULT_MODEL_SAMPLES);
    let seed = raw.seed.as_deref().map(parse_count).transpose()?.unwrap_or(0) as u64;
    Ok(ModelBlock { models, samples, seed })
}
