//! Torus weights and the lattice of Fourier multi-indices.
//!
//! The spectrum of `-iT` for `T = Σ μ_j T_j` sits inside `{μ·p : p ∈ ℤ^d}`.
//! On the sphere only the nonnegative orthant carries CR functions, so every
//! enumeration here walks `ℕ₀^d`.
//!
//! Window membership is decided with the plain floating dot product
//! `((μ₁p₁ + μ₂p₂) + …)`, no tolerance. Both window ends are closed. For
//! rational weights a point can land exactly on the boundary, and whether it
//! is included then depends on how the weights were rounded.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Positive torus weights `μ = (μ₁, …, μ_d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidWeights("at least one weight is required".into()));
        }
        if let Some(bad) = entries.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidWeights(format!("weight {bad} is not a positive finite number")));
        }
        Ok(Self(entries))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::MIN, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::MAX, f64::min)
    }
}

/// A Fourier multi-index `p ∈ ℤ^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint(SmallVec<[i64; 4]>);

impl LatticePoint {
    pub fn new(entries: impl Into<SmallVec<[i64; 4]>>) -> Self {
        Self(entries.into())
    }

    pub fn zeros(dim: usize) -> Self {
        Self(SmallVec::from_elem(0, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&p| p >= 0)
    }

    /// `|p| = Σ p_j`.
    pub fn degree(&self) -> i64 {
        self.0.iter().sum()
    }
}

impl From<&[i64]> for LatticePoint {
    fn from(v: &[i64]) -> Self {
        Self(SmallVec::from_slice(v))
    }
}

impl<const N: usize> From<[i64; N]> for LatticePoint {
    fn from(v: [i64; N]) -> Self {
        Self(SmallVec::from_slice(&v))
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// Spectral value `μ·p`.
pub fn weight_value(mu: &WeightVector, p: &LatticePoint) -> Result<f64> {
    if mu.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: mu.dim(), found: p.dim() });
    }
    Ok(dot(mu.entries(), p.entries()))
}

#[inline]
fn dot(mu: &[f64], p: &[i64]) -> f64 {
    mu.iter().zip(p).fold(0.0, |acc, (m, &q)| acc + m * q as f64)
}

/// All `p ∈ ℕ₀^d` with `lo ≤ μ·p ≤ hi`, in lexicographic order.
pub fn enumerate_weights(mu: &WeightVector, lo: f64, hi: f64) -> Vec<LatticePoint> {
    let mut out = Vec::new();
    visit_window(mu, lo, hi, |p| out.push(LatticePoint::from(p)));
    out
}

/// `#{p ∈ ℕ₀^d : 0 ≤ μ·p ≤ k}` without materializing the points.
pub fn count_weights(mu: &WeightVector, k: f64) -> u64 {
    count_window(mu, 0.0, k)
}

/// Number of points in the closed window `[lo, hi]`.
pub fn count_window(mu: &WeightVector, lo: f64, hi: f64) -> u64 {
    if !(hi >= 0.0) || hi < lo {
        return 0;
    }
    let w = mu.entries();
    let mut p = vec![0i64; w.len()];
    count_rec(w, lo, hi, 0, 0.0, &mut p)
}

/// Calls `f` for every point of the closed window, in lexicographic order.
pub fn visit_window<F: FnMut(&[i64])>(mu: &WeightVector, lo: f64, hi: f64, mut f: F) {
    if !(hi >= 0.0) || hi < lo {
        return;
    }
    let w = mu.entries();
    let mut p = vec![0i64; w.len()];
    visit_rec(w, lo, hi, 0, 0.0, &mut p, &mut f);
}

fn visit_rec<F: FnMut(&[i64])>(
    w: &[f64],
    lo: f64,
    hi: f64,
    j: usize,
    partial: f64,
    p: &mut [i64],
    f: &mut F,
) {
    let d = w.len();
    if j + 1 == d {
        if let Some((first, last)) = last_coordinate_range(w[j], lo, hi, partial) {
            for q in first..=last {
                p[j] = q;
                f(p);
            }
        }
        p[j] = 0;
        return;
    }
    let mut q = 0i64;
    loop {
        let s = partial + w[j] * q as f64;
        if s > hi {
            break;
        }
        p[j] = q;
        visit_rec(w, lo, hi, j + 1, s, p, f);
        q += 1;
    }
    p[j] = 0;
}

fn count_rec(w: &[f64], lo: f64, hi: f64, j: usize, partial: f64, p: &mut [i64]) -> u64 {
    let d = w.len();
    if j + 1 == d {
        return match last_coordinate_range(w[j], lo, hi, partial) {
            Some((first, last)) => (last - first + 1) as u64,
            None => 0,
        };
    }
    let mut total = 0;
    let mut q = 0i64;
    loop {
        let s = partial + w[j] * q as f64;
        if s > hi {
            break;
        }
        total += count_rec(w, lo, hi, j + 1, s, p);
        q += 1;
    }
    total
}

/// Inclusive range of `q ≥ 0` with `lo ≤ partial + w·q ≤ hi`, evaluated with
/// exactly the floating expression used by [`weight_value`].
fn last_coordinate_range(w: f64, lo: f64, hi: f64, partial: f64) -> Option<(i64, i64)> {
    let val = |q: i64| partial + w * q as f64;
    if val(0) > hi {
        return None;
    }
    let mut last = ((hi - partial) / w).floor().max(0.0) as i64;
    while last > 0 && val(last) > hi {
        last -= 1;
    }
    while val(last + 1) <= hi {
        last += 1;
    }
    let mut first = if lo <= partial { 0 } else { ((lo - partial) / w).ceil().max(0.0) as i64 };
    while first > 0 && val(first - 1) >= lo {
        first -= 1;
    }
    while val(first) < lo {
        first += 1;
    }
    (first <= last).then_some((first, last))
}
