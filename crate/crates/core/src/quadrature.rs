//! Quadrature backends.
//!
//! Torus-invariant integrals over `S^{2n+1}` reduce to the simplex:
//! `∫ f dσ = 2π^{n+1} ∫_{Δ_n} f(t) dt`, where `t_j = |z_j|²` and `Δ_n` is
//! parametrized by `(t₁, …, t_n)`. Simplex rules are tensor Gauss–Jacobi rules
//! pulled back through the collapsed-coordinate (Duffy) map.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::cutoff::CutoffFunction;
use crate::error::{Error, Result};
use crate::lattice::LatticePoint;
use crate::special::{compensated_sum, ln_factorial, ln_gamma, log_sum_exp};

/// A 1-D rule `Σ w_i f(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Affine image on `[a, b]` of a rule on `[−1, 1]`.
    pub fn mapped(&self, a: f64, b: f64) -> GaussRule {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        GaussRule {
            nodes: self.nodes.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| w * half).collect(),
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        compensated_sum(self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` (Newton on the three-term
/// recurrence).
pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n > 0, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Golub–Welsch on a symmetric tridiagonal Jacobi matrix.
fn golub_welsch(diag: &[f64], offdiag: &[f64], mu0: f64) -> GaussRule {
    let n = diag.len();
    let mut j = DMatrix::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = diag[i];
        if i + 1 < n {
            j[(i, i + 1)] = offdiag[i];
            j[(i + 1, i)] = offdiag[i];
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> =
        (0..n).map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    GaussRule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
}

/// Gauss–Jacobi rule for the weight `(1−x)^α (1+x)^β` on `[−1, 1]`.
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> GaussRule {
    assert!(n > 0 && alpha > -1.0 && beta > -1.0);
    let ab = alpha + beta;
    let diag: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                (beta - alpha) / (ab + 2.0)
            } else {
                let s = 2.0 * k as f64 + ab;
                (beta * beta - alpha * alpha) / (s * (s + 2.0))
            }
        })
        .collect();
    let offdiag: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            let s = 2.0 * k + ab;
            (4.0 * k * (k + alpha) * (k + beta) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0))).sqrt()
        })
        .collect();
    let mu0 = ((ab + 1.0) * 2f64.ln() + ln_gamma(alpha + 1.0) + ln_gamma(beta + 1.0) - ln_gamma(ab + 2.0)).exp();
    golub_welsch(&diag, &offdiag, mu0)
}

/// Gauss–Hermite rule for the weight `e^{−x²}` on `ℝ`.
pub fn gauss_hermite(n: usize) -> GaussRule {
    assert!(n > 0);
    let offdiag: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    golub_welsch(&vec![0.0; n], &offdiag, PI.sqrt())
}

/// Composite Gauss–Legendre: `panels` equal panels of `points` nodes each.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositeGauss {
    pub panels: usize,
    pub points: usize,
}

impl Default for CompositeGauss {
    fn default() -> Self {
        Self { panels: 8, points: 16 }
    }
}

impl CompositeGauss {
    pub fn order(&self) -> usize {
        self.panels * self.points
    }

    pub fn rule(&self, a: f64, b: f64) -> GaussRule {
        let base = gauss_legendre(self.points);
        let h = (b - a) / self.panels as f64;
        let mut nodes = Vec::with_capacity(self.order());
        let mut weights = Vec::with_capacity(self.order());
        for p in 0..self.panels {
            let lo = a + h * p as f64;
            let r = base.mapped(lo, lo + h);
            nodes.extend(r.nodes);
            weights.extend(r.weights);
        }
        GaussRule { nodes, weights }
    }
}

/// Quadrature rule on the simplex `Δ_n`, nodes stored as full barycentric
/// vectors `(t₁, …, t_{n+1})`.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    n: usize,
    degree: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl SimplexRule {
    /// Default polynomial degree for `n = 1`.
    pub const DEFAULT_DEGREE: usize = 60;

    /// Rule exact for polynomials of total degree `≤ degree` in `t`.
    pub fn new(n: usize, degree: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidRule("simplex dimension must be at least 1".into()));
        }
        let points = degree / 2 + 1;
        // Direction i carries the Jacobian factor (1 − u_i)^{n−1−i}.
        let factors: Vec<GaussRule> = (0..n)
            .map(|i| {
                let alpha = (n - 1 - i) as f64;
                let r = gauss_jacobi(points, alpha, 0.0);
                let scale = 2f64.powf(alpha + 1.0);
                GaussRule {
                    nodes: r.nodes.iter().map(|x| 0.5 * (1.0 + x)).collect(),
                    weights: r.weights.iter().map(|w| w / scale).collect(),
                }
            })
            .collect();
        let total = points.pow(n as u32);
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; n];
        for _ in 0..total {
            let mut t = Vec::with_capacity(n + 1);
            let mut remaining = 1.0;
            let mut w = 1.0;
            for (i, f) in factors.iter().enumerate() {
                let u = f.nodes[idx[i]];
                t.push(remaining * u);
                remaining *= 1.0 - u;
                w *= f.weights[idx[i]];
            }
            t.push(remaining);
            nodes.push(t);
            weights.push(w);
            for i in (0..n).rev() {
                idx[i] += 1;
                if idx[i] < points {
                    break;
                }
                idx[i] = 0;
            }
        }
        Ok(Self { n, degree, nodes, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫_{Δ_n} f(t) dt`.
    pub fn integrate_simplex<F: Fn(&[f64]) -> f64>(&self, f: F) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.weights.len());
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let v = f(t);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand { node: t.clone(), value: v });
            }
            terms.push(w * v);
        }
        Ok(compensated_sum(terms))
    }
}

/// `ln(2π^{n+1})`, the sphere-to-simplex factor.
pub fn ln_sphere_factor(n: usize) -> f64 {
    2f64.ln() + (n as f64 + 1.0) * PI.ln()
}

/// `∫_{S^{2n+1}} f dσ` for `f` depending only on `t = (|z_j|²)`.
pub fn integrate_sphere_invariant<F: Fn(&[f64]) -> f64>(f: F, n: usize, rule: &SimplexRule) -> Result<f64> {
    if rule.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rule.n() });
    }
    Ok(ln_sphere_factor(n).exp() * rule.integrate_simplex(f)?)
}

/// Log-space variant: `ln ∫ exp(log_f) dσ` with log-sum-exp accumulation.
/// `log_f` may return `-inf`.
pub fn log_integrate_sphere_invariant<F: Fn(&[f64]) -> f64>(log_f: F, n: usize, rule: &SimplexRule) -> Result<f64> {
    if rule.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rule.n() });
    }
    let mut terms = Vec::with_capacity(rule.weights.len());
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = log_f(t);
        if v.is_nan() || v == f64::INFINITY {
            return Err(Error::NonFiniteIntegrand { node: t.clone(), value: v });
        }
        terms.push(w.ln() + v);
    }
    Ok(ln_sphere_factor(n) + log_sum_exp(&terms))
}

/// `ln ∫_{S^{2n+1}} Π |z_j|^{2p_j} dσ = ln(2π^{n+1} p! / (n+|p|)!)`.
pub fn ln_monomial_moment(p: &LatticePoint, n: usize) -> Result<f64> {
    if p.dim() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, found: p.dim() });
    }
    if !p.is_nonnegative() {
        return Err(Error::InvalidWeights(format!("monomial exponent {p} has a negative entry")));
    }
    let num: f64 = p.entries().iter().map(|&q| ln_factorial(q as u64)).sum();
    Ok(ln_sphere_factor(n) + num - ln_factorial(n as u64 + p.degree() as u64))
}

pub fn monomial_moment(p: &LatticePoint, n: usize) -> Result<f64> {
    Ok(ln_monomial_moment(p, n)?.exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

const MC_CHUNK: usize = 1 << 15;

/// Uniform sampling of `S^{2n+1}` by normalized Gaussian vectors. Each chunk of
/// samples draws from its own ChaCha stream, so the result is a deterministic
/// function of `seed` regardless of thread scheduling.
pub fn monte_carlo_sphere<F>(f: F, n: usize, samples: usize, seed: u64) -> Result<MonteCarloEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if samples < 1000 {
        return Err(Error::InvalidRule(format!("Monte-Carlo needs at least 1000 samples, got {samples}")));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    // (count, mean, M2) per chunk, merged in chunk order.
    let stats: Vec<(f64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut t = vec![0.0; n + 1];
            let (mut mean, mut m2) = (0.0, 0.0);
            for i in 0..len {
                let mut norm = 0.0;
                for tj in t.iter_mut() {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    let y: f64 = StandardNormal.sample(&mut rng);
                    *tj = x * x + y * y;
                    norm += *tj;
                }
                t.iter_mut().for_each(|tj| *tj /= norm);
                let v = f(&t);
                let delta = v - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (v - mean);
            }
            (len as f64, mean, m2)
        })
        .collect();
    let (count, mean, m2) = stats.into_iter().fold((0.0, 0.0, 0.0), |(na, ma, sa), (nb, mb, sb)| {
        let total = na + nb;
        let delta = mb - ma;
        (total, ma + delta * nb / total, sa + sb + delta * delta * na * nb / total)
    });
    let area = 2.0 * std::f64::consts::PI.powi(n as i32 + 1) / (1..=n).map(|k| k as f64).product::<f64>();
    let var = if count > 1.0 { m2 / (count - 1.0) } else { 0.0 };
    Ok(MonteCarloEstimate { estimate: area * mean, stderr: area * (var / count).sqrt() })
}

/// Whether the cutoff enters linearly or squared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutoffPower {
    Single,
    Squared,
}

/// `∫ (2t)^n g(t) dt` over the support of `τ`, with `g = τ` or `τ²`.
pub fn integrate_cutoff(tau: &CutoffFunction, n: usize, power: CutoffPower) -> Result<f64> {
    integrate_cutoff_with(tau, n, power, CompositeGauss::default())
}

pub fn integrate_cutoff_with(tau: &CutoffFunction, n: usize, power: CutoffPower, rule: CompositeGauss) -> Result<f64> {
    let (a, b) = tau.support();
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidCutoff { a, b, reason: "unbounded support" });
    }
    let rule = rule.rule(a, b);
    Ok(rule.integrate(|t| {
        let g = tau.eval(t);
        let g = match power {
            CutoffPower::Single => g,
            CutoffPower::Squared => g * g,
        };
        (2.0 * t).powi(n as i32) * g
    }))
}
