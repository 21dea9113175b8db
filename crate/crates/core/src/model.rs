//! The Heisenberg model `ℂⁿ × ℝ` with CR fields `∂_{z_j} + iλ_j z̄_j ∂_θ`.
//!
//! A weight matrix `W` gives `Φ₀(z) = z* W z` and, on the Fourier slice `η`,
//! `Φ_η(z) = z* (ηΛ + W) z` with `Λ = diag(λ)`. Volume is `dv = 2^n dx`.
//! Since `Λ > 0` the positivity window `{η : M_{Φ_η} > 0}` is a half-line.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::HermitianForm;
use crate::quadrature::{gauss_legendre, GaussRule};
use crate::special::{ln_factorial, NeumaierSum};

/// Smallest eigenvalue treated as positive.
pub const POSITIVITY_TOL: f64 = 1e-12;
/// Width to which window endpoints are bracketed.
pub const ENDPOINT_TOL: f64 = 1e-12;
/// Gauss–Legendre order for η-integrals.
pub const ETA_ORDER: usize = 64;
/// Relative tail above which a truncated series is refused.
pub const SERIES_TAIL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelData {
    lambda: Vec<f64>,
    weight: HermitianForm,
}

impl ModelData {
    pub fn new(lambda: Vec<f64>, weight: HermitianForm) -> Result<Self> {
        if lambda.is_empty() || lambda.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidWeights(format!("Levi eigenvalues must be positive and finite: {lambda:?}")));
        }
        if weight.dim() != lambda.len() {
            return Err(Error::DimensionMismatch { expected: lambda.len(), found: weight.dim() });
        }
        Ok(Self { lambda, weight })
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn weight_matrix(&self) -> &HermitianForm {
        &self.weight
    }

    /// `ηΛ + W`, the matrix of `Φ_η`.
    fn phi_matrix(&self, eta: f64) -> HermitianForm {
        HermitianForm::from_real_diagonal(&self.lambda).scale(eta).add(&self.weight)
    }
}

fn check_z(model: &ModelData, z: &[Complex64]) -> Result<()> {
    if z.len() != model.n() {
        return Err(Error::DimensionMismatch { expected: model.n(), found: z.len() });
    }
    Ok(())
}

/// `Φ_η(z) = η Σ λ_j |z_j|² + Σ W_{jt} z̄_j z_t`.
pub fn phi_eta(model: &ModelData, eta: f64, z: &[Complex64]) -> Result<f64> {
    check_z(model, z)?;
    Ok(model.phi_matrix(eta).quadratic_form(&DVector::from_column_slice(z)))
}

/// `M_{Φ_η} = 2(ηΛ + W)`.
pub fn m_phi(model: &ModelData, eta: f64) -> HermitianForm {
    model.phi_matrix(eta).scale(2.0)
}

pub fn in_window_r0(model: &ModelData, eta: f64) -> bool {
    m_phi(model, eta).min_eigenvalue() > POSITIVITY_TOL
}

/// Diagonal of the weighted Bergman projection for `e^{−2Φ_η}`; zero off the window.
pub fn bergman_diagonal(model: &ModelData, eta: f64, z: &[Complex64]) -> Result<f64> {
    check_z(model, z)?;
    let m = m_phi(model, eta);
    if m.min_eigenvalue() <= POSITIVITY_TOL {
        return Ok(0.0);
    }
    let phi = phi_eta(model, eta, z)?;
    Ok((2.0 * phi).exp() * (2.0 * std::f64::consts::PI).powi(-(model.n() as i32)) * m.det().abs())
}

/// A truncated series together with a bound on what was left out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail: f64,
}

/// Orthonormal-monomial expansion of the Bergman diagonal, summed over total
/// degree `≤ degree_cutoff` in coordinates diagonalizing `Φ_η`.
pub fn bergman_series(model: &ModelData, eta: f64, z: &[Complex64], degree_cutoff: usize) -> Result<f64> {
    let s = bergman_series_with_tail(model, eta, z, degree_cutoff)?;
    if s.tail > SERIES_TAIL_TOL * s.value {
        return Err(Error::SeriesTruncated { cutoff: degree_cutoff, tail: s.tail });
    }
    Ok(s.value)
}

pub fn bergman_series_with_tail(model: &ModelData, eta: f64, z: &[Complex64], degree_cutoff: usize) -> Result<SeriesValue> {
    check_z(model, z)?;
    let (c, u) = model.phi_matrix(eta).eigen_decomposition();
    if c[0] * 2.0 <= POSITIVITY_TOL {
        return Err(Error::OutsideWindow { a: eta, b: eta });
    }
    let w = u.adjoint() * DVector::from_column_slice(z);
    let n = model.n();
    // ln(|w_j|²) and ln(2c_j), so each term is Π (2c_j)^{m_j+1}|w_j|^{2m_j} / (2π m_j!).
    let lw: Vec<f64> = w.iter().map(|x| x.norm_sqr().ln()).collect();
    let l2c: Vec<f64> = c.iter().map(|x| (2.0 * x).ln()).collect();
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    let mut sum = NeumaierSum::default();
    let mut last_shell = 0.0;
    let mut m = vec![0u64; n];
    for degree in 0..=degree_cutoff {
        let mut shell = NeumaierSum::default();
        visit_compositions(&mut m, degree as u64, 0, &mut |m| {
            let mut acc = 0.0;
            for j in 0..n {
                let mj = m[j] as f64;
                if m[j] > 0 {
                    if lw[j] == f64::NEG_INFINITY {
                        return;
                    }
                    acc += mj * lw[j];
                }
                acc += (mj + 1.0) * l2c[j] - ln_2pi - ln_factorial(m[j]);
            }
            shell.add(acc.exp());
        });
        last_shell = shell.total();
        sum.add(last_shell);
    }
    // Shells of Π e^{x_j} decay like X^d/d! with X = Σ 2c_j|w_j|²; bound the
    // rest by a geometric series once the ratio drops below one.
    let x: f64 = c.iter().zip(&w).map(|(cj, wj)| 2.0 * cj * wj.norm_sqr()).sum();
    let ratio = x / (degree_cutoff as f64 + 1.0);
    let tail = if ratio < 1.0 { last_shell * ratio / (1.0 - ratio) } else { f64::INFINITY };
    Ok(SeriesValue { value: sum.total(), tail })
}

fn visit_compositions(m: &mut [u64], remaining: u64, j: usize, f: &mut impl FnMut(&[u64])) {
    if j + 1 == m.len() {
        m[j] = remaining;
        f(m);
        return;
    }
    for first in (0..=remaining).rev() {
        m[j] = first;
        visit_compositions(m, remaining - first, j + 1, f);
    }
}

/// `∫_{t ∈ [0,1], R + 2tL > 0} |det(R + 2tL)| dt` for `L > 0`.
///
/// The smallest eigenvalue of `R + 2tL` is increasing in `t`, so the window is
/// `]t*, 1]` and `t*` is bracketed by bisection.
pub fn positive_window_integral(r: &HermitianForm, l: &HermitianForm) -> Result<f64> {
    Ok(positive_window(r, l)?.map_or(0.0, |(lo, hi)| {
        gauss_legendre(ETA_ORDER).mapped(lo, hi).integrate(|t| r.add(&l.scale(2.0 * t)).det().abs())
    }))
}

/// The subinterval of `[0, 1]` on which `R + 2tL > 0`, if nonempty.
pub fn positive_window(r: &HermitianForm, l: &HermitianForm) -> Result<Option<(f64, f64)>> {
    if r.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: r.dim(), found: l.dim() });
    }
    if !l.is_positive_definite(0.0) {
        return Err(Error::NotPositiveDefinite("curvature direction L"));
    }
    let min_eig = |t: f64| r.add(&l.scale(2.0 * t)).min_eigenvalue();
    if min_eig(1.0) <= POSITIVITY_TOL {
        return Ok(None);
    }
    if min_eig(0.0) > POSITIVITY_TOL {
        return Ok(Some((0.0, 1.0)));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > ENDPOINT_TOL {
        let mid = 0.5 * (lo + hi);
        if min_eig(mid) > POSITIVITY_TOL {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some((hi, 1.0)))
}

/// `(2π)^{−n−1} ∫_{[0,1] ∩ R̂₀} |det M_{Φ_η}| dη`.
pub fn window_bound(model: &ModelData) -> f64 {
    let r = model.weight.scale(2.0);
    let l = HermitianForm::from_real_diagonal(&model.lambda);
    let integral = positive_window_integral(&r, &l).expect("Λ is positive definite and matches W");
    integral * (2.0 * std::f64::consts::PI).powi(-(model.n() as i32) - 1)
}

/// `∫_{[0,1]} |det(R ⊕ 2tL)| dt` over the `t` where the block matrix is positive.
///
/// For `R > 0` this is `det R · det L · 2^b/(b+1)`; otherwise the window is empty.
pub fn curvature_window_integral(r: &HermitianForm, l: &HermitianForm) -> Result<f64> {
    if !l.is_positive_definite(0.0) {
        return Err(Error::NotPositiveDefinite("curvature direction L"));
    }
    if !r.is_positive_definite(POSITIVITY_TOL) {
        return Ok(0.0);
    }
    let det_r = r.det();
    Ok(gauss_legendre(ETA_ORDER).mapped(0.0, 1.0).integrate(|t| (det_r * l.scale(2.0 * t).det()).abs()))
}

/// `∫_{[0,1]} |det(R + 2tL)| dt` over the `t` where `R + 2tL` is positive;
/// `R` and `L` act on the same space.
pub fn curvature_window_integral_shared(r: &HermitianForm, l: &HermitianForm) -> Result<f64> {
    positive_window_integral(r, l)
}

/// A polynomial `h_η(z) = Σ_m c_m(η) z^m` whose coefficients are polynomials in `η`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HolomorphicFactor {
    /// Exponent `m` and the coefficients of `c_m(η)` in increasing powers of `η`.
    pub terms: Vec<(Vec<u32>, Vec<Complex64>)>,
}

impl HolomorphicFactor {
    pub fn constant(c: Complex64) -> Self {
        Self { terms: vec![(Vec::new(), vec![c])] }
    }

    pub fn monomial(exponent: Vec<u32>, c: Complex64) -> Self {
        Self { terms: vec![(exponent, vec![c])] }
    }

    fn exponent_in(m: &[u32], n: usize) -> impl Iterator<Item = u32> + '_ {
        (0..n).map(move |j| m.get(j).copied().unwrap_or(0))
    }

    fn coefficient(poly: &[Complex64], eta: f64) -> Complex64 {
        poly.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * eta + c)
    }

    pub fn eval(&self, eta: f64, z: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(m, poly)| {
                Self::coefficient(poly, eta) * Self::exponent_in(m, z.len()).zip(z).map(|(e, zj)| zj.powu(e)).product::<Complex64>()
            })
            .sum()
    }

    /// Coefficients of `w ↦ h_η(Uw)` on monomials in `w`.
    fn in_basis(&self, eta: f64, u: &DMatrix<Complex64>) -> BTreeMap<Vec<u32>, Complex64> {
        let n = u.nrows();
        let mut out: BTreeMap<Vec<u32>, Complex64> = BTreeMap::new();
        for (m, poly) in &self.terms {
            let c = Self::coefficient(poly, eta);
            let mut prod: BTreeMap<Vec<u32>, Complex64> = BTreeMap::from([(vec![0; n], c)]);
            for (j, e) in Self::exponent_in(m, n).enumerate() {
                for _ in 0..e {
                    // z_j = Σ_k U_{jk} w_k
                    let mut next = BTreeMap::new();
                    for (mono, coef) in &prod {
                        for k in 0..n {
                            let mut mk = mono.clone();
                            mk[k] += 1;
                            *next.entry(mk).or_insert(Complex64::new(0.0, 0.0)) += coef * u[(j, k)];
                        }
                    }
                    prod = next;
                }
            }
            for (mono, coef) in prod {
                *out.entry(mono).or_insert(Complex64::new(0.0, 0.0)) += coef;
            }
        }
        out
    }
}

/// Fourier-side profile `σ(η)` of a window CR function.
pub type Profile = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// `u(z,θ) = ∫ σ(η) e^{iηθ} h_η(z) e^{−η Σ λ_j|z_j|²} dη`, `σ` supported in `[a, b]`.
#[derive(Clone)]
pub struct WindowFunction {
    support: (f64, f64),
    sigma: Profile,
    factor: HolomorphicFactor,
}

impl std::fmt::Debug for WindowFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WindowFunction").field("support", &self.support).field("factor", &self.factor).finish()
    }
}

impl WindowFunction {
    pub fn new(support: (f64, f64), sigma: Profile, factor: HolomorphicFactor) -> Result<Self> {
        let (a, b) = support;
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::OutsideWindow { a, b });
        }
        Ok(Self { support, sigma, factor })
    }

    /// `σ(η) = g((η−a)/(b−a)) · Σ_k c_k η^k` with `g(s) = exp(−1/(4s(1−s)))`.
    pub fn bump(a: f64, b: f64, coefficients: Vec<Complex64>, factor: HolomorphicFactor) -> Result<Self> {
        let sigma: Profile = Arc::new(move |eta| {
            if eta <= a || eta >= b {
                return Complex64::new(0.0, 0.0);
            }
            let s = (eta - a) / (b - a);
            let g = (-1.0 / (4.0 * s * (1.0 - s))).exp();
            coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * eta + c) * g
        });
        Self::new((a, b), sigma, factor)
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn sigma(&self, eta: f64) -> Complex64 {
        (self.sigma)(eta)
    }

    pub fn factor(&self) -> &HolomorphicFactor {
        &self.factor
    }

    fn rule(&self) -> GaussRule {
        gauss_legendre(ETA_ORDER).mapped(self.support.0, self.support.1)
    }

    /// Direct evaluation of `u(z, θ)` with the η-rule of [`sample_window_value`].
    /// Accurate only for `|θ|` well below the rule's resolution.
    pub fn eval(&self, model: &ModelData, z: &[Complex64], theta: f64) -> Result<Complex64> {
        self.eval_with(model, z, theta, &self.rule())
    }

    /// Direct evaluation of `u(z, θ)` with a caller-supplied η-rule on the support.
    pub fn eval_with(&self, model: &ModelData, z: &[Complex64], theta: f64, rule: &GaussRule) -> Result<Complex64> {
        check_z(model, z)?;
        let q: f64 = model.lambda.iter().zip(z).map(|(l, zj)| l * zj.norm_sqr()).sum();
        Ok(rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&eta, &w)| {
                self.sigma(eta) * Complex64::from_polar(1.0, eta * theta) * self.factor.eval(eta, z) * (w * (-eta * q).exp())
            })
            .sum())
    }
}

/// `u(0,0)` and `‖u‖²_{Φ₀} = 2π ∫ |σ(η)|² ∫ |h_η|² e^{−2Φ_η} dv dη`.
///
/// The inner integral is exact: in coordinates `w` diagonalizing `Φ_η` the
/// monomials are orthogonal with `‖w^m‖² = Π 2π m_j!/(2c_j)^{m_j+1}`.
pub fn sample_window_value(model: &ModelData, wf: &WindowFunction) -> Result<(Complex64, f64)> {
    let (a, b) = wf.support;
    if !in_window_r0(model, a) {
        return Err(Error::OutsideWindow { a, b });
    }
    let n = model.n();
    let origin = vec![Complex64::new(0.0, 0.0); n];
    let rule = wf.rule();
    let mut value = Complex64::new(0.0, 0.0);
    let mut norm = NeumaierSum::default();
    for (&eta, &w) in rule.nodes.iter().zip(&rule.weights) {
        let s = wf.sigma(eta);
        value += s * wf.factor.eval(eta, &origin) * w;
        if s.norm_sqr() == 0.0 {
            continue;
        }
        norm.add(w * s.norm_sqr() * slice_norm_sq(model, eta, &wf.factor)?);
    }
    Ok((value, 2.0 * std::f64::consts::PI * norm.total()))
}

/// `∫ |h_η|² e^{−2Φ_η} dv`.
fn slice_norm_sq(model: &ModelData, eta: f64, h: &HolomorphicFactor) -> Result<f64> {
    let (c, u) = model.phi_matrix(eta).eigen_decomposition();
    if c[0] * 2.0 <= POSITIVITY_TOL {
        return Err(Error::OutsideWindow { a: eta, b: eta });
    }
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    let mut acc = NeumaierSum::default();
    for (m, coef) in h.in_basis(eta, &u) {
        let ln_norm: f64 =
            m.iter().zip(&c).map(|(&mj, cj)| ln_2pi + ln_factorial(mj as u64) - (mj as f64 + 1.0) * (2.0 * cj).ln()).sum();
        acc.add(coef.norm_sqr() * ln_norm.exp());
    }
    Ok(acc.total())
}
