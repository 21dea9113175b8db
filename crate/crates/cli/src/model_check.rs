//! Model-space checks: the Bergman closed form against its monomial series,
//! and `|u(0,0)|²/‖u‖²` of random window functions against the window bound.

use anyhow::Result;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use szego_core::linalg::HermitianForm;
use szego_core::model::{
    bergman_diagonal, bergman_series_with_tail, m_phi, positive_window, sample_window_value, window_bound, HolomorphicFactor,
    ModelData, WindowFunction,
};

use crate::config::ModelBlock;

/// Allowed relative gap between the Bergman closed form and its series.
pub const SERIES_GAP_TOL: f64 = 1e-8;
/// Relative slack on the window bound.
pub const BOUND_SLACK: f64 = 1e-9;
const SERIES_POINTS: usize = 5;
const SERIES_REL_TAIL: f64 = 1e-14;
const MAX_SERIES_DEGREE: usize = 400;

#[derive(Debug, Clone, Serialize)]
pub struct ModelResult {
    pub index: usize,
    pub n: usize,
    /// `[lo, hi]`, the part of `[0, 1]` where `M_{Φ_η} > 0`.
    pub window: Option<(f64, f64)>,
    pub bound: f64,
    pub eta_checked: f64,
    pub series_max_gap: f64,
    pub samples: usize,
    pub max_ratio: f64,
    pub max_ratio_over_bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub seed: u64,
    pub samples_per_model: usize,
    pub models: Vec<ModelResult>,
    pub max_ratio: f64,
    pub max_ratio_over_bound: f64,
    pub pass: bool,
}

impl ModelSummary {
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .models
            .iter()
            .map(|m| {
                format!(
                    "{} model {}: bound {:.6e}, max ratio {:.6e} ({:.3} of bound), series gap {:.1e}",
                    if m.pass { "ok  " } else { "FAIL" },
                    m.index,
                    m.bound,
                    m.max_ratio,
                    m.max_ratio_over_bound,
                    m.series_max_gap
                )
            })
            .collect();
        out.push(format!("model checks: max ratio {:.6e}, max ratio/bound {:.3}", self.max_ratio, self.max_ratio_over_bound));
        out
    }
}

fn window_of(model: &ModelData) -> Result<Option<(f64, f64)>> {
    let r = model.weight_matrix().scale(2.0);
    let l = HermitianForm::from_real_diagonal(model.lambda());
    Ok(positive_window(&r, &l)?)
}

fn random_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// A bump profile with random polynomial modulation and a random factor,
/// supported strictly inside `]lo, hi]`.
pub fn random_window_function(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Result<WindowFunction> {
    let lo = lo + 1e-6 * (hi - lo).max(1e-6);
    let a = rng.random_range(lo..lo + 0.5 * (hi - lo));
    let b = rng.random_range(a + 0.05 * (hi - a)..=hi);
    let sigma: Vec<Complex64> = (0..rng.random_range(1..=4)).map(|_| random_c(rng)).collect();
    let mut terms = Vec::new();
    for _ in 0..rng.random_range(1..=4) {
        let exponent: Vec<u32> = (0..n).map(|_| rng.random_range(0..=2)).collect();
        let poly: Vec<Complex64> = (0..rng.random_range(1..=3)).map(|_| random_c(rng)).collect();
        terms.push((exponent, poly));
    }
    // A constant term keeps u(0,0) generically nonzero.
    terms.push((vec![0; n], vec![random_c(rng), random_c(rng)]));
    Ok(WindowFunction::bump(a, b, sigma, HolomorphicFactor { terms })?)
}

/// Largest relative gap between closed form and series at `z = 0` and a few random `z`.
fn series_gap(model: &ModelData, eta: f64, rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = model.n();
    let mut points = vec![vec![Complex64::new(0.0, 0.0); n]];
    for _ in 0..SERIES_POINTS {
        points.push((0..n).map(|_| 0.8 * random_c(rng)).collect());
    }
    let mut worst: f64 = 0.0;
    for z in points {
        let closed = bergman_diagonal(model, eta, &z)?;
        let mut degree = 20;
        let series = loop {
            let s = bergman_series_with_tail(model, eta, &z, degree)?;
            if s.tail <= SERIES_REL_TAIL * s.value || degree >= MAX_SERIES_DEGREE {
                break s.value;
            }
            degree += 20;
        };
        worst = worst.max((series / closed - 1.0).abs());
    }
    Ok(worst)
}

/// A point of the window where `M_{Φ_η}` is comfortably positive.
fn eta_for_series(model: &ModelData, window: Option<(f64, f64)>) -> f64 {
    let mut eta = window.map_or(1.0, |(lo, hi)| 0.5 * (lo + hi));
    while m_phi(model, eta).min_eigenvalue() < 0.2 {
        eta += 0.25;
    }
    eta
}

fn check_model(index: usize, model: &ModelData, samples: usize, seed: u64) -> Result<ModelResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let window = window_of(model)?;
    let bound = window_bound(model);
    let eta = eta_for_series(model, window);
    let gap = series_gap(model, eta, &mut rng)?;
    let mut max_ratio: f64 = 0.0;
    let mut drawn = 0;
    if let Some((lo, hi)) = window {
        for _ in 0..samples {
            let wf = random_window_function(&mut rng, model.n(), lo, hi)?;
            let (value, norm) = sample_window_value(model, &wf)?;
            max_ratio = max_ratio.max(value.norm_sqr() / norm);
            drawn += 1;
        }
    }
    let over = if bound > 0.0 { max_ratio / bound } else { 0.0 };
    let pass = gap <= SERIES_GAP_TOL && max_ratio <= bound * (1.0 + BOUND_SLACK);
    Ok(ModelResult {
        index,
        n: model.n(),
        window,
        bound,
        eta_checked: eta,
        series_max_gap: gap,
        samples: drawn,
        max_ratio,
        max_ratio_over_bound: over,
        pass,
    })
}

/// Runs every model; each uses its own random stream so the result does not
/// depend on the thread count.
pub fn check_models(block: &ModelBlock, seed_override: Option<u64>) -> Result<ModelSummary> {
    let seed = seed_override.unwrap_or(block.seed);
    let models = block
        .models
        .par_iter()
        .enumerate()
        .map(|(i, m)| check_model(i, m, block.samples, seed))
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = models.iter().map(|m| m.max_ratio).fold(0.0, f64::max);
    let max_ratio_over_bound = models.iter().map(|m| m.max_ratio_over_bound).fold(0.0, f64::max);
    let pass = models.iter().all(|m| m.pass);
    Ok(ModelSummary { seed, samples_per_model: block.samples, models, max_ratio, max_ratio_over_bound, pass })
}
