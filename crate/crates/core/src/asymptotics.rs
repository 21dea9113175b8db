//! Leading-coefficient extraction from kernel sweeps and the predicted constants.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cutoff::CutoffFunction;
use crate::error::{Error, Result};
use crate::lattice::WeightVector;
use crate::quadrature::{integrate_cutoff, CutoffPower};
use crate::sphere::{det_levi, SpherePoint};

/// Samples `(k, value)` with strictly increasing `k > 0` and `value ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSweep {
    entries: Vec<(f64, f64)>,
}

impl KernelSweep {
    pub fn new(entries: Vec<(f64, f64)>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InvalidSweep(format!("need at least 2 entries, got {}", entries.len())));
        }
        for &(k, v) in &entries {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::InvalidSweep(format!("k must be positive and finite, got {k}")));
            }
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidSweep(format!("values must be finite and nonnegative, got {v}")));
            }
        }
        if let Some(w) = entries.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidSweep(format!("k must be strictly increasing: {} then {}", w[0].0, w[1].0)));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Richardson extrapolation of `value/k^power` to `k = ∞` through all entries,
/// treating it as a polynomial in `1/k`.
pub fn fit_leading(sweep: &KernelSweep, power: u32) -> f64 {
    fit_leading_order(sweep, power, sweep.len() - 1)
}

/// As [`fit_leading`] but using only the `order + 1` largest `k`.
pub fn fit_leading_order(sweep: &KernelSweep, power: u32, order: usize) -> f64 {
    let order = order.clamp(1, sweep.len() - 1);
    let tail = &sweep.entries[sweep.len() - order - 1..];
    let k: Vec<f64> = tail.iter().map(|(k, _)| *k).collect();
    // First level (x_j − x_i)/(k_j − k_i) with x = value/k^{power−1} = k·f,
    // which is exact on power laws plus one lower-order term.
    let x: Vec<f64> = tail.iter().map(|(k, v)| v / k.powi(power as i32 - 1)).collect();
    let mut p: Vec<f64> = (0..x.len() - 1).map(|i| (x[i + 1] - x[i]) / (k[i + 1] - k[i])).collect();
    // Remaining levels of Neville's scheme in h = 1/k at h = 0, scaled by k_i k_j.
    for width in 2..x.len() {
        for i in 0..x.len() - width {
            let j = i + width;
            p[i] = (k[j] * p[i + 1] - k[i] * p[i]) / (k[j] - k[i]);
        }
    }
    p[0]
}

/// Which power of the cutoff enters the leading coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum A0Variant {
    SingleTau,
    TauSquared,
}

impl A0Variant {
    pub const ALL: [A0Variant; 2] = [A0Variant::SingleTau, A0Variant::TauSquared];

    pub fn name(&self) -> &'static str {
        match self {
            A0Variant::SingleTau => "single_tau",
            A0Variant::TauSquared => "tau_squared",
        }
    }

    fn power(&self) -> CutoffPower {
        match self {
            A0Variant::SingleTau => CutoffPower::Single,
            A0Variant::TauSquared => CutoffPower::Squared,
        }
    }
}

/// `(2π)^{−n−1} det 𝓛_z ∫ (2t)^n g(t) dt` with `g = τ` or `τ²`.
pub fn predicted_a0(mu: &WeightVector, z: &SpherePoint, tau: &CutoffFunction, variant: A0Variant) -> Result<f64> {
    let n = z.n();
    Ok(a0_from_det(det_levi(mu, z)?, n, tau, variant)?)
}

/// [`predicted_a0`] with the Levi determinant supplied by the caller.
pub fn a0_from_det(det: f64, n: usize, tau: &CutoffFunction, variant: A0Variant) -> Result<f64> {
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(two_pi.powi(-(n as i32) - 1) * det.abs() * integrate_cutoff(tau, n, variant.power())?)
}

/// `½ π^{−n−1} det 𝓛_z / (n+1)`, the limit of `k^{−n−1} S_k(z)`.
pub fn predicted_limit(mu: &WeightVector, z: &SpherePoint) -> Result<f64> {
    Ok(limit_from_det(det_levi(mu, z)?, z.n()))
}

pub fn limit_from_det(det: f64, n: usize) -> f64 {
    0.5 * std::f64::consts::PI.powi(-(n as i32) - 1) * det.abs() / (n as f64 + 1.0)
}

/// Fitted leading coefficient against the predicted constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub fitted_leading: f64,
    /// Keyed by `limit` without a cutoff, by variant name with one.
    pub predicted: BTreeMap<String, f64>,
    pub relative_error: BTreeMap<String, f64>,
    pub power: u32,
    pub richardson_order: usize,
    /// Prediction with the smallest relative error.
    pub best: String,
}

impl AsymptoticReport {
    fn from_predictions(fitted: f64, predicted: BTreeMap<String, f64>, power: u32, order: usize) -> Self {
        let relative_error: BTreeMap<String, f64> =
            predicted.iter().map(|(k, p)| (k.clone(), relative_error(fitted, *p))).collect();
        let best = relative_error
            .iter()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k.clone())
            .unwrap_or_default();
        Self { fitted_leading: fitted, predicted, relative_error, power, richardson_order: order, best }
    }

    /// Names of the predictions matched within `tol`.
    pub fn matching(&self, tol: f64) -> Vec<&str> {
        self.relative_error.iter().filter(|(_, e)| **e <= tol).map(|(k, _)| k.as_str()).collect()
    }

    pub fn max_relative_error(&self) -> f64 {
        self.relative_error.values().copied().fold(0.0, f64::max)
    }
}

pub fn relative_error(fitted: f64, predicted: f64) -> f64 {
    if predicted == 0.0 {
        if fitted == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        ((fitted - predicted) / predicted).abs()
    }
}

/// Richardson order used by [`verify`]: two-point for the sharp window, up
/// to three points for a smooth cutoff.
pub fn default_order(sweep: &KernelSweep, smooth: bool) -> usize {
    if smooth {
        (sweep.len() - 1).min(2)
    } else {
        1
    }
}

/// Fits `sweep` (samples of `S_k(z)`, or of `S_{k,τ}(z)` when `tau` is given)
/// and compares with the predictions at `(mu, z)`.
pub fn verify(sweep: &KernelSweep, mu: &WeightVector, z: &SpherePoint, tau: Option<&CutoffFunction>) -> Result<AsymptoticReport> {
    verify_with_det(sweep, det_levi(mu, z)?, z.n(), tau)
}

pub fn verify_with_det(sweep: &KernelSweep, det: f64, n: usize, tau: Option<&CutoffFunction>) -> Result<AsymptoticReport> {
    let power = n as u32 + 1;
    let order = default_order(sweep, tau.is_some());
    let fitted = fit_leading_order(sweep, power, order);
    let mut predicted = BTreeMap::new();
    match tau {
        None => {
            predicted.insert("limit".to_string(), limit_from_det(det, n));
        }
        Some(tau) => {
            for v in A0Variant::ALL {
                predicted.insert(v.name().to_string(), a0_from_det(det, n, tau, v)?);
            }
        }
    }
    Ok(AsymptoticReport::from_predictions(fitted, predicted, power, order))
}

/// `k (value/k^power − a0)` for every entry.
pub fn remainder_sequence(sweep: &KernelSweep, power: u32, a0: f64) -> Vec<f64> {
    sweep.entries.iter().map(|(k, v)| k * (v / k.powi(power as i32) - a0)).collect()
}

/// Whether every `|r|` stays within `factor` of the median of `|r|`.
pub fn bounded_by_median(values: &[f64], factor: f64) -> bool {
    if values.is_empty() {
        return true;
    }
    let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let mid = abs.len() / 2;
    let median = if abs.len() % 2 == 1 { abs[mid] } else { 0.5 * (abs[mid - 1] + abs[mid]) };
    abs.iter().all(|&v| v <= factor * median)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, SQRT_2};

    fn sweep(ks: &[f64], f: impl Fn(f64) -> f64) -> KernelSweep {
        KernelSweep::new(ks.iter().map(|&k| (k, f(k))).collect()).unwrap()
    }

    #[test]
    fn fit_examples() {
        assert_eq!(fit_leading(&sweep(&[10.0, 20.0], |k| 3.0 * k * k), 2), 3.0);
        assert_eq!(fit_leading(&sweep(&[100.0, 200.0], |k| k * k + k), 2), 1.0);
        let s = sweep(&[10.0, 20.0, 40.0], |k| 2.0 * k * k + 5.0 * k + 7.0);
        assert!((fit_leading(&s, 2) - 2.0).abs() < 1e-12);
        // Order 1 on the same data keeps the 1/k² error.
        assert!((fit_leading_order(&s, 2, 1) - 2.0).abs() > 1e-3);

        let diag = |k: f64| {
            let k = k as u64;
            (k + 1) as f64 * (k + 2) as f64 / (8.0 * PI * PI)
        };
        let fitted = fit_leading(&sweep(&[800.0, 1600.0], diag), 2);
        assert!((fitted / (1.0 / (8.0 * PI * PI)) - 1.0).abs() < 0.005);
        let other = fit_leading(&sweep(&[1000.0, 2000.0], diag), 2);
        assert!((other / fitted - 1.0).abs() < 0.005);
    }

    #[test]
    fn sweep_validation() {
        assert!(KernelSweep::new(vec![(1.0, 1.0)]).is_err());
        assert!(KernelSweep::new(vec![(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(KernelSweep::new(vec![(2.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(KernelSweep::new(vec![(0.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(KernelSweep::new(vec![(1.0, -1.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn predicted_limit_examples() {
        let diag = WeightVector::new(vec![1.0]).unwrap();
        let z = SpherePoint::from_simplex(&[0.3, 0.7]).unwrap();
        assert!((predicted_limit(&diag, &z).unwrap() - 0.01266515).abs() < 1e-8);
        let w = WeightVector::new(vec![1.0, SQRT_2]).unwrap();
        let e2 = SpherePoint::from_simplex(&[0.0, 1.0]).unwrap();
        assert!((predicted_limit(&w, &e2).unwrap() - 1.0 / (8.0 * PI * PI * SQRT_2)).abs() < 1e-10);
        let mid = SpherePoint::from_simplex(&[0.5, 0.5]).unwrap();
        let m = (1.0 + SQRT_2) / 2.0;
        assert!((predicted_limit(&w, &mid).unwrap() - 1.0 / (8.0 * PI * PI * m)).abs() < 1e-10);
    }

    #[test]
    fn a0_examples() {
        let diag = WeightVector::new(vec![1.0]).unwrap();
        let z = SpherePoint::from_simplex(&[0.3, 0.7]).unwrap();
        let ind = CutoffFunction::indicator(0.0, 1.0).unwrap();
        let lim = predicted_limit(&diag, &z).unwrap();
        for v in A0Variant::ALL {
            assert!((predicted_a0(&diag, &z, &ind, v).unwrap() - lim).abs() < 1e-12 * lim);
        }
        let bump = CutoffFunction::smooth_bump(0.1, 0.9).unwrap();
        let single = predicted_a0(&diag, &z, &bump, A0Variant::SingleTau).unwrap();
        let squared = predicted_a0(&diag, &z, &bump, A0Variant::TauSquared).unwrap();
        assert!(single > 10.0 * squared);
        assert_eq!(a0_from_det(1.0, 1, &bump, A0Variant::SingleTau).unwrap(), 2.0 * a0_from_det(0.5, 1, &bump, A0Variant::SingleTau).unwrap());
    }

    #[test]
    fn verify_examples() {
        let diag = WeightVector::new(vec![1.0]).unwrap();
        let z = SpherePoint::from_simplex(&[0.3, 0.7]).unwrap();
        let s = sweep(&[800.0, 1600.0], |k| (k + 1.0) * (k + 2.0) / (8.0 * PI * PI));
        let r = verify(&s, &diag, &z, None).unwrap();
        assert!(r.relative_error["limit"] < 0.01);
        assert_eq!(r.best, "limit");

        let zeros = sweep(&[800.0, 1600.0], |_| 0.0);
        let r = verify(&zeros, &diag, &z, None).unwrap();
        assert_eq!(r.fitted_leading, 0.0);
        assert_eq!(r.relative_error["limit"], 1.0);

        let tau = CutoffFunction::smooth_bump(0.1, 0.9).unwrap();
        let oracle = |k: f64| (0..=k as u64).map(|m| tau.eval(m as f64 / k) * (m + 1) as f64).sum::<f64>() / (4.0 * PI * PI);
        let r = verify(&sweep(&[400.0, 800.0, 1600.0], oracle), &diag, &z, Some(&tau)).unwrap();
        assert_eq!(r.matching(0.02), vec!["single_tau"]);
        assert_eq!(r.best, "single_tau");
    }

    #[test]
    fn remainder_helpers() {
        let s = sweep(&[100.0, 200.0, 400.0], |k| 2.0 * k * k + 3.0 * k);
        let r = remainder_sequence(&s, 2, 2.0);
        assert!(r.iter().all(|v| (v - 3.0).abs() < 1e-10));
        assert!(bounded_by_median(&r, 3.0));
        assert!(!bounded_by_median(&[1.0, 1.0, 10.0], 3.0));
    }
}
