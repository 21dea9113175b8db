//! Equivariant Hardy-space kernels on the weighted sphere.
//!
//! Boundary values of holomorphic functions on the ball decompose under the
//! full torus into the monomial lines `ℂ z^p`, `p ∈ ℕ₀^{n+1}`: a CR function of
//! weight `p` extends holomorphically, its Taylor series is invariant under the
//! same torus twist, and only `z^p` survives. For the diagonal circle action a
//! Fourier component of weight `q` is the span of all `z^p` with `|p| = q`,
//! which is again an orthogonal sum of monomial lines. So in both cases every
//! kernel below is a sum of `|z^p|² / ‖z^p‖²` over monomial exponents `p`
//! whose spectral value `ν·p` (per-coordinate weights `ν`) lies in the window.
//!
//! Monomials are mutually orthogonal for every torus-invariant measure, so
//! `{z^p / ‖z^p‖}` is an orthonormal basis and only the norms
//! `‖z^p‖² = ∫ |z^p|² dv_X` are needed. With `dv_X = (2^n / m) dσ`,
//!
//! ```text
//! ‖z^p‖² = 2π^{n+1} p!/(n+|p|)! · E[2^n / (ν·t)],   t ~ Dirichlet(p + 1).
//! ```
//!
//! [`NormTable::build`] evaluates the expectation with the convergent series
//! `1/(ν·t) = ν_max⁻¹ Σ_m (s·t)^m`, `s_j = 1 − ν_j/ν_max`, whose Dirichlet
//! moments have closed forms. This stays accurate for the very peaked
//! integrands at `|p| ~ 10³` where a fixed simplex rule would not.
//! [`monomial_norm`] computes the same quantity by simplex quadrature.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cutoff::CutoffFunction;
use crate::error::{Error, Result};
use crate::lattice::{visit_window, LatticePoint, WeightVector};
use crate::quadrature::{ln_monomial_moment, log_integrate_sphere_invariant, SimplexRule};
use crate::special::{log_sum_exp, NeumaierSum};
use crate::sphere::{coordinate_weights, volume_density_from_moduli, SpherePoint};

/// Relative truncation target of the density series.
const SERIES_TOL: f64 = 1e-17;
const SERIES_MAX_TERMS: usize = 20_000;

/// Squared `L²(dv_X)` norm of `z^p`, by simplex quadrature in log space.
pub fn monomial_norm(mu: &WeightVector, p: &LatticePoint, rule: &SimplexRule) -> Result<f64> {
    Ok(ln_monomial_norm(mu, p, rule)?.exp())
}

pub fn ln_monomial_norm(mu: &WeightVector, p: &LatticePoint, rule: &SimplexRule) -> Result<f64> {
    let n = rule.n();
    if p.dim() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, found: p.dim() });
    }
    let nu = coordinate_weights(mu, n)?;
    let exps = p.entries();
    log_integrate_sphere_invariant(
        |t| {
            let mut acc = volume_density_from_moduli(&nu, t).ln();
            for (&q, &x) in exps.iter().zip(t) {
                if q > 0 {
                    acc += q as f64 * x.ln();
                }
            }
            acc
        },
        n,
        rule,
    )
}

/// `ln ‖z^p‖²` through the Dirichlet series for the density.
pub fn ln_monomial_norm_series(nu: &[f64], p: &[i64]) -> f64 {
    let n = nu.len() - 1;
    let lp = LatticePoint::from(p);
    ln_monomial_moment(&lp, n).expect("exponent matches dimension") + ln_expected_density(nu, p)
}

/// `ln E[2^n/(ν·t)]` for `t ~ Dirichlet(p + 1)`.
fn ln_expected_density(nu: &[f64], p: &[i64]) -> f64 {
    let n = nu.len() - 1;
    let nu_max = nu.iter().copied().fold(f64::MIN, f64::max);
    let base = n as f64 * 2f64.ln() - nu_max.ln();
    let s: Vec<f64> = nu.iter().map(|w| 1.0 - w / nu_max).collect();
    let s_max = s.iter().copied().fold(0.0, f64::max);
    if s_max == 0.0 {
        return base;
    }
    let terms = ((SERIES_TOL * (1.0 - s_max)).ln() / s_max.ln()).ceil() as usize;
    let alpha: Vec<f64> = p.iter().map(|&q| q as f64 + 1.0).collect();
    let moments = ln_linear_form_moments(&alpha, &s, terms.min(SERIES_MAX_TERMS));
    base + log_sum_exp(&moments)
}

/// `ln E[(s·t)^m]`, `m = 0..=m_max`, for `t ~ Dirichlet(alpha)`, `s_j ≥ 0`.
///
/// Peels off one coordinate at a time: `t₁ ~ Beta(α₁, Σ_{j>1} α_j)` and the
/// rest is `(1 − t₁)` times an independent Dirichlet, so the moments convolve
/// against beta-binomial weights.
fn ln_linear_form_moments(alpha: &[f64], s: &[f64], m_max: usize) -> Vec<f64> {
    let ln_s = |x: f64| if x > 0.0 { x.ln() } else { f64::NEG_INFINITY };
    let last = alpha.len() - 1;
    let mut inner: Vec<f64> = (0..=m_max).map(|m| if m == 0 { 0.0 } else { m as f64 * ln_s(s[last]) }).collect();
    let mut b = alpha[last];
    for j in (0..last).rev() {
        let a = alpha[j];
        let ls = ln_s(s[j]);
        let inner_is_delta = inner[1..].iter().all(|v| *v == f64::NEG_INFINITY);
        let mut out = vec![f64::NEG_INFINITY; m_max + 1];
        if s[j] == 0.0 {
            // Only i = 0 contributes: P(m, 0) = (b)_m / (a+b)_m.
            let mut lp = 0.0;
            for m in 0..=m_max {
                out[m] = lp + inner[m];
                lp += ((b + m as f64) / (a + b + m as f64)).ln();
            }
        } else if inner_is_delta {
            // Only i = m contributes: P(m, m) = (a)_m / (a+b)_m.
            let mut lp = 0.0;
            for m in 0..=m_max {
                out[m] = lp + m as f64 * ls;
                lp += ((a + m as f64) / (a + b + m as f64)).ln();
            }
        } else {
            let mut lp0 = 0.0;
            let mut terms = Vec::with_capacity(m_max + 1);
            for m in 0..=m_max {
                terms.clear();
                let mut lp = lp0;
                for i in 0..=m {
                    terms.push(lp + i as f64 * ls + inner[m - i]);
                    if i < m {
                        let (fi, fm) = (i as f64, m as f64);
                        lp += ((fm - fi) / (fi + 1.0)).ln() + ((a + fi) / (b + fm - fi - 1.0)).ln();
                    }
                }
                out[m] = log_sum_exp(&terms);
                lp0 += ((b + m as f64) / (a + b + m as f64)).ln();
            }
        }
        inner = out;
        b += a;
    }
    inner
}

/// How a [`NormTable`] was filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormMethod {
    Series,
    Quadrature { degree: usize },
}

impl NormMethod {
    fn tag(&self) -> String {
        match self {
            NormMethod::Series => "series".to_string(),
            NormMethod::Quadrature { degree } => format!("quadrature:{degree}"),
        }
    }

    fn parse(tag: &str) -> Option<Self> {
        if tag == "series" {
            return Some(NormMethod::Series);
        }
        tag.strip_prefix("quadrature:")?.parse().ok().map(|degree| NormMethod::Quadrature { degree })
    }
}

/// `ln ‖z^p‖²` for every monomial exponent with `ν·p ≤ k_max`.
///
/// Entries are kept in lexicographic order of `p`. The table is immutable
/// after construction and safe to share between threads.
#[derive(Debug, Clone, PartialEq)]
pub struct NormTable {
    n: usize,
    mu: WeightVector,
    nu: Vec<f64>,
    k_max: f64,
    method: NormMethod,
    dims: usize,
    exponents: Vec<i64>,
    values: Vec<f64>,
    log_norms: Vec<f64>,
}

impl NormTable {
    /// Builds the table with the Dirichlet series.
    pub fn build(mu: &WeightVector, n: usize, k_max: f64) -> Result<Self> {
        let nu = coordinate_weights(mu, n)?;
        let (exponents, values) = enumerate_exponents(&nu, k_max)?;
        let log_norms = exponents.par_chunks(n + 1).map(|p| ln_monomial_norm_series(&nu, p)).collect();
        Ok(Self { n, mu: mu.clone(), nu, k_max, method: NormMethod::Series, dims: n + 1, exponents, values, log_norms })
    }

    /// Builds the table by simplex quadrature with a shared rule.
    pub fn build_by_quadrature(mu: &WeightVector, n: usize, k_max: f64, rule: &SimplexRule) -> Result<Self> {
        if rule.n() != n {
            return Err(Error::DimensionMismatch { expected: n, found: rule.n() });
        }
        let nu = coordinate_weights(mu, n)?;
        let (exponents, values) = enumerate_exponents(&nu, k_max)?;
        let log_norms = exponents
            .par_chunks(n + 1)
            .map(|p| ln_monomial_norm(mu, &LatticePoint::from(p), rule))
            .collect::<Result<Vec<_>>>()?;
        let method = NormMethod::Quadrature { degree: rule.degree() };
        Ok(Self { n, mu: mu.clone(), nu, k_max, method, dims: n + 1, exponents, values, log_norms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weights(&self) -> &WeightVector {
        &self.mu
    }

    pub fn coordinate_weights(&self) -> &[f64] {
        &self.nu
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn method(&self) -> NormMethod {
        self.method
    }

    pub fn len(&self) -> usize {
        self.log_norms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_norms.is_empty()
    }

    pub fn exponent(&self, i: usize) -> &[i64] {
        &self.exponents[i * self.dims..(i + 1) * self.dims]
    }

    /// Spectral value `ν·p` of entry `i`.
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn log_norm(&self, i: usize) -> f64 {
        self.log_norms[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], f64, f64)> + '_ {
        self.exponents.chunks(self.dims).zip(&self.values).zip(&self.log_norms).map(|((p, &v), &l)| (p, v, l))
    }

    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        if p.dim() != self.dims {
            return None;
        }
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.exponent(mid).cmp(p.entries()) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn ln_norm_of(&self, p: &LatticePoint) -> Result<f64> {
        self.index_of(p).map(|i| self.log_norms[i]).ok_or_else(|| Error::MissingNorm(p.entries().to_vec()))
    }

    /// Cache key: everything that determines the table contents.
    pub fn key(&self) -> NormTableKey {
        NormTableKey { n: self.n, weights: self.mu.entries().to_vec(), k_max: self.k_max, method: self.method }
    }

    /// Writes `# key` followed by CSV rows `p1,…,p_{n+1},log_norm`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::NormTable(e.to_string());
        writeln!(out, "{}", self.key().header_line()).map_err(io)?;
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dims).map(|j| format!("p{j}")).collect();
        header.push("log_norm".into());
        w.write_record(&header).map_err(|e| Error::NormTable(e.to_string()))?;
        for (p, _, l) in self.iter() {
            let mut rec: Vec<String> = p.iter().map(|q| q.to_string()).collect();
            rec.push(format!("{l:.16e}"));
            w.write_record(&rec).map_err(|e| Error::NormTable(e.to_string()))?;
        }
        w.flush().map_err(io)
    }

    /// Reads a table written by [`NormTable::write_csv`].
    pub fn read_csv<R: BufRead>(mut input: R) -> Result<Self> {
        let mut first = String::new();
        input.read_line(&mut first).map_err(|e| Error::NormTable(e.to_string()))?;
        let key = NormTableKey::parse_header(first.trim_end())?;
        let mu = WeightVector::new(key.weights.clone())?;
        let nu = coordinate_weights(&mu, key.n)?;
        let dims = key.n + 1;
        let mut rdr = csv::Reader::from_reader(input);
        let mut exponents = Vec::new();
        let mut values = Vec::new();
        let mut log_norms = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::NormTable(e.to_string()))?;
            if rec.len() != dims + 1 {
                return Err(Error::NormTable(format!("expected {} columns, found {}", dims + 1, rec.len())));
            }
            let p: Vec<i64> = rec
                .iter()
                .take(dims)
                .map(|s| s.parse::<i64>().map_err(|e| Error::NormTable(format!("bad exponent {s:?}: {e}"))))
                .collect::<Result<_>>()?;
            let l: f64 = rec[dims].parse().map_err(|e| Error::NormTable(format!("bad log norm {:?}: {e}", &rec[dims])))?;
            values.push(nu.iter().zip(&p).fold(0.0, |acc, (m, &q)| acc + m * q as f64));
            exponents.extend(p);
            log_norms.push(l);
        }
        let table = Self { n: key.n, mu, nu, k_max: key.k_max, method: key.method, dims, exponents, values, log_norms };
        let (expected, _) = enumerate_exponents(&table.nu, table.k_max)?;
        if expected != table.exponents {
            return Err(Error::NormTable("rows do not match the lattice window of the header".into()));
        }
        Ok(table)
    }
}

/// Identity of a norm table for cache validation.
#[derive(Debug, Clone, PartialEq)]
pub struct NormTableKey {
    pub n: usize,
    pub weights: Vec<f64>,
    pub k_max: f64,
    pub method: NormMethod,
}

impl NormTableKey {
    const MAGIC: &'static str = "# szego-norm-table";

    fn header_line(&self) -> String {
        let w: Vec<String> = self.weights.iter().map(|x| format!("{x:.16e}")).collect();
        format!("{} n={} k_max={:.16e} weights={} method={}", Self::MAGIC, self.n, self.k_max, w.join(";"), self.method.tag())
    }

    fn parse_header(line: &str) -> Result<Self> {
        let rest = line.strip_prefix(Self::MAGIC).ok_or_else(|| Error::NormTable("missing table header".into()))?;
        let (mut n, mut k_max, mut weights, mut method) = (None, None, None, None);
        for field in rest.split_whitespace() {
            let (k, v) = field.split_once('=').ok_or_else(|| Error::NormTable(format!("bad header field {field:?}")))?;
            match k {
                "n" => n = v.parse().ok(),
                "k_max" => k_max = v.parse().ok(),
                "weights" => weights = v.split(';').map(|x| x.parse::<f64>().ok()).collect::<Option<Vec<_>>>(),
                "method" => method = NormMethod::parse(v),
                _ => {}
            }
        }
        match (n, k_max, weights, method) {
            (Some(n), Some(k_max), Some(weights), Some(method)) => Ok(Self { n, weights, k_max, method }),
            _ => Err(Error::NormTable(format!("incomplete header {line:?}"))),
        }
    }
}

fn enumerate_exponents(nu: &[f64], k_max: f64) -> Result<(Vec<i64>, Vec<f64>)> {
    if !(k_max >= 0.0 && k_max.is_finite()) {
        return Err(Error::NormTable(format!("k_max must be finite and nonnegative, got {k_max}")));
    }
    let w = WeightVector::new(nu.to_vec())?;
    let mut exponents = Vec::new();
    let mut values = Vec::new();
    visit_window(&w, 0.0, k_max, |p| {
        exponents.extend_from_slice(p);
        values.push(nu.iter().zip(p).fold(0.0, |acc, (m, &q)| acc + m * q as f64));
    });
    Ok((exponents, values))
}

/// Per-point data for kernel sums: `ln t_j`, or `None` where `t_j = 0`.
struct LogModuli(Vec<Option<f64>>);

impl LogModuli {
    fn new(t: &[f64]) -> Self {
        Self(t.iter().map(|&x| if x > 0.0 { Some(x.ln()) } else { None }).collect())
    }

    /// `|z^p|² / ‖z^p‖²`, zero when a vanishing coordinate carries a positive exponent.
    #[inline]
    fn component(&self, p: &[i64], log_norm: f64) -> f64 {
        let mut acc = -log_norm;
        for (&q, lt) in p.iter().zip(&self.0) {
            if q > 0 {
                match lt {
                    Some(l) => acc += q as f64 * l,
                    None => return 0.0,
                }
            }
        }
        acc.exp()
    }
}

fn check_point(table: &NormTable, z: &SpherePoint) -> Result<()> {
    if z.n() != table.n {
        return Err(Error::DimensionMismatch { expected: table.n + 1, found: z.n() + 1 });
    }
    Ok(())
}

fn check_range(table: &NormTable, k: f64) -> Result<()> {
    if !(k >= 0.0) {
        return Err(Error::NormTable(format!("window end must be nonnegative, got {k}")));
    }
    if k > table.k_max {
        return Err(Error::NormTable(format!("window end {k} exceeds the table range {}", table.k_max)));
    }
    Ok(())
}

/// `S_p(z) = |z^p|² / ‖z^p‖²`.
pub fn szego_component(table: &NormTable, p: &LatticePoint, z: &SpherePoint) -> Result<f64> {
    check_point(table, z)?;
    let l = table.ln_norm_of(p)?;
    Ok(LogModuli::new(&z.moduli_sq()).component(p.entries(), l))
}

/// `S_k(z)`: sum of components with `0 ≤ ν·p ≤ k`.
pub fn szego_window(table: &NormTable, k: f64, z: &SpherePoint) -> Result<f64> {
    Ok(szego_window_sweep(table, &[k], z)?[0])
}

/// `S_k(z)` for several `k` in one pass. Each component is added to the bucket
/// of the smallest `k ≥ ν·p` and the buckets are accumulated, so the result is
/// nondecreasing in `k` by construction.
pub fn szego_window_sweep(table: &NormTable, ks: &[f64], z: &SpherePoint) -> Result<Vec<f64>> {
    check_point(table, z)?;
    szego_window_sweep_moduli(table, ks, &z.moduli_sq())
}

pub(crate) fn szego_window_sweep_moduli(table: &NormTable, ks: &[f64], t: &[f64]) -> Result<Vec<f64>> {
    for &k in ks {
        check_range(table, k)?;
    }
    Ok(window_sweep_unchecked(table, ks, t))
}

fn window_sweep_unchecked(table: &NormTable, ks: &[f64], t: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..ks.len()).collect();
    order.sort_by(|&a, &b| ks[a].total_cmp(&ks[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| ks[i]).collect();
    let lm = LogModuli::new(t);
    let mut buckets = vec![NeumaierSum::default(); sorted.len()];
    for (p, v, l) in table.iter() {
        let slot = sorted.partition_point(|&k| k < v);
        if slot < sorted.len() {
            buckets[slot].add(lm.component(p, l));
        }
    }
    let mut running = 0.0;
    let mut cumulative = vec![0.0; sorted.len()];
    for (i, b) in buckets.iter().enumerate() {
        running += b.total();
        cumulative[i] = running;
    }
    let mut out = vec![0.0; ks.len()];
    for (pos, &i) in order.iter().enumerate() {
        out[i] = cumulative[pos];
    }
    out
}

/// `S_{k,τ}(z) = Σ τ(ν·p / k) S_p(z)`.
pub fn szego_weighted(table: &NormTable, tau: &CutoffFunction, k: f64, z: &SpherePoint) -> Result<f64> {
    Ok(szego_weighted_sweep(table, tau, &[k], z)?[0])
}

pub fn szego_weighted_sweep(table: &NormTable, tau: &CutoffFunction, ks: &[f64], z: &SpherePoint) -> Result<Vec<f64>> {
    check_point(table, z)?;
    szego_weighted_sweep_moduli(table, tau, ks, &z.moduli_sq())
}

pub(crate) fn szego_weighted_sweep_moduli(table: &NormTable, tau: &CutoffFunction, ks: &[f64], t: &[f64]) -> Result<Vec<f64>> {
    check_weighted(table, tau, ks)?;
    Ok(weighted_sweep_unchecked(table, tau, ks, t))
}

fn check_weighted(table: &NormTable, tau: &CutoffFunction, ks: &[f64]) -> Result<()> {
    if tau.is_indicator() {
        return Err(Error::InvalidCutoff { a: tau.a, b: tau.b, reason: "indicator cutoffs are limits, not admissible weights" });
    }
    for &k in ks {
        if !(k > 0.0) {
            return Err(Error::NormTable(format!("k must be positive, got {k}")));
        }
        check_range(table, k * tau.b)?;
    }
    Ok(())
}

fn weighted_sweep_unchecked(table: &NormTable, tau: &CutoffFunction, ks: &[f64], t: &[f64]) -> Vec<f64> {
    let lm = LogModuli::new(t);
    let mut sums = vec![NeumaierSum::default(); ks.len()];
    for (p, v, l) in table.iter() {
        let mut component = None;
        for (k, acc) in ks.iter().zip(sums.iter_mut()) {
            let x = v / k;
            if x > tau.a && x < tau.b {
                let w = tau.eval(x);
                if w != 0.0 {
                    let c = *component.get_or_insert_with(|| lm.component(p, l));
                    acc.add(w * c);
                }
            }
        }
    }
    sums.iter().map(NeumaierSum::total).collect()
}

/// `∫_X S_k dv`, integrating the kernel against `dv_X` with a simplex rule.
pub fn integrate_window_kernel(table: &NormTable, k: f64, rule: &SimplexRule) -> Result<f64> {
    check_range(table, k)?;
    crate::quadrature::integrate_sphere_invariant(
        |t| window_sweep_unchecked(table, &[k], t)[0] * volume_density_from_moduli(&table.nu, t),
        table.n,
        rule,
    )
}

/// `∫_X S_{k,τ} dv`.
pub fn integrate_weighted_kernel(table: &NormTable, tau: &CutoffFunction, k: f64, rule: &SimplexRule) -> Result<f64> {
    check_weighted(table, tau, &[k])?;
    crate::quadrature::integrate_sphere_invariant(
        |t| weighted_sweep_unchecked(table, tau, &[k], t)[0] * volume_density_from_moduli(&table.nu, t),
        table.n,
        rule,
    )
}

/// Outcome of testing a window function against the kernel bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalCheck {
    /// `|u(z)|² / ‖u‖²`.
    pub ratio: f64,
    /// `S_k(z)`.
    pub bound: f64,
}

/// For `u = Σ c_p z^p` with `ν·p ≤ k`, compares `|u(z)|²/‖u‖²` with `S_k(z)`.
pub fn extremal_check(
    table: &NormTable,
    k: f64,
    z: &SpherePoint,
    coefficients: &[(LatticePoint, Complex64)],
) -> Result<ExtremalCheck> {
    check_point(table, z)?;
    check_range(table, k)?;
    if coefficients.iter().all(|(_, c)| c.norm_sqr() == 0.0) {
        return Err(Error::ZeroFunction);
    }
    let mut value = Complex64::new(0.0, 0.0);
    let mut norm_sq = NeumaierSum::default();
    for (p, c) in coefficients {
        let i = table.index_of(p).ok_or_else(|| Error::MissingNorm(p.entries().to_vec()))?;
        if table.value(i) > k {
            return Err(Error::NormTable(format!("coefficient {p} lies outside the window [0, {k}]")));
        }
        let monomial: Complex64 = p.entries().iter().zip(z.coords()).map(|(&q, zj)| zj.powi(q as i32)).product();
        value += c * monomial;
        norm_sq.add(c.norm_sqr() * table.log_norm(i).exp());
    }
    Ok(ExtremalCheck { ratio: value.norm_sqr() / norm_sq.total(), bound: szego_window(table, k, z)? })
}

/// Coefficients `c_p = conj(z₀^p) / ‖z^p‖²` of the reproducing kernel at `z₀`,
/// over the window `ν·p ≤ k`.
pub fn reproducing_coefficients(table: &NormTable, k: f64, z0: &SpherePoint) -> Result<Vec<(LatticePoint, Complex64)>> {
    check_point(table, z0)?;
    check_range(table, k)?;
    Ok(table
        .iter()
        .filter(|(_, v, _)| *v <= k)
        .map(|(p, _, l)| {
            let monomial: Complex64 = p.iter().zip(z0.coords()).map(|(&q, zj)| zj.powi(q as i32)).product();
            (LatticePoint::from(p), monomial.conj() * (-l).exp())
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::CutoffFamily;
    use crate::lattice::{count_weights, enumerate_weights};
    use crate::quadrature::monte_carlo_sphere;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, SQRT_2};

    fn mu(v: &[f64]) -> WeightVector {
        WeightVector::new(v.to_vec()).unwrap()
    }

    fn point(t: &[f64]) -> SpherePoint {
        SpherePoint::from_simplex(t).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> SpherePoint {
        let z: Vec<Complex64> =
            (0..dim).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        SpherePoint::normalized(z).unwrap()
    }

    /// Diagonal closed form: `Σ_{m ≤ k} (m+1) / (4π²)`.
    fn diagonal_window(k: usize) -> f64 {
        (0..=k).map(|m| (m + 1) as f64).sum::<f64>() / (4.0 * PI * PI)
    }

    #[test]
    fn monomial_norm_examples() {
        let rule = SimplexRule::new(1, SimplexRule::DEFAULT_DEGREE).unwrap();
        let diag = mu(&[1.0]);
        assert!((monomial_norm(&diag, &[0, 0].into(), &rule).unwrap() - 4.0 * PI * PI).abs() < 1e-12);
        assert!((monomial_norm(&diag, &[1, 0].into(), &rule).unwrap() - 2.0 * PI * PI).abs() < 1e-12);

        // Weighted: quadrature against Monte-Carlo and the series.
        let w = mu(&[1.0, SQRT_2]);
        let q = monomial_norm(&w, &[1, 0].into(), &rule).unwrap();
        let series = ln_monomial_norm_series(&[1.0, SQRT_2], &[1, 0]).exp();
        assert!((q - series).abs() < 1e-8 * q, "{q} {series}");
        let mc = monte_carlo_sphere(|t| t[0] * 2.0 / (t[0] + SQRT_2 * t[1]), 1, 400_000, 17).unwrap();
        assert!((mc.estimate - q).abs() < 4.0 * mc.stderr, "{mc:?} vs {q}");
    }

    #[test]
    fn series_matches_quadrature_for_moderate_exponents() {
        let rule = SimplexRule::new(1, 200).unwrap();
        for w in [[1.0, SQRT_2], [2.0, 3.0], [SQRT_2, 1.0], [1.0, 7.5]] {
            for p in [[0i64, 0], [3, 1], [0, 17], [25, 30], [60, 2]] {
                let q = ln_monomial_norm(&mu(&w), &p.into(), &rule).unwrap();
                let s = ln_monomial_norm_series(&w, &p);
                assert!((q - s).abs() < 1e-10, "w={w:?} p={p:?}: {q} vs {s}");
            }
        }
        let rule2 = SimplexRule::new(2, 80).unwrap();
        let w3 = [1.0, SQRT_2, 0.6];
        for p in [[0i64, 0, 0], [2, 1, 3], [7, 0, 4], [10, 10, 10]] {
            let q = ln_monomial_norm(&mu(&w3), &p.into(), &rule2).unwrap();
            let s = ln_monomial_norm_series(&w3, &p);
            assert!((q - s).abs() < 1e-10, "p={p:?}: {q} vs {s}");
        }
    }

    #[test]
    fn series_tracks_laplace_limit_for_large_exponents() {
        // For |p| large the Dirichlet mass concentrates at p/|p|, so
        // E[w] → w(p/|p|).
        let nu = [1.0, SQRT_2];
        let p = [3000i64, 1000];
        let n = 1;
        let lp = LatticePoint::from(&p[..]);
        let got = ln_monomial_norm_series(&nu, &p) - ln_monomial_moment(&lp, n).unwrap();
        let t = [0.75, 0.25];
        let limit = volume_density_from_moduli(&nu, &t).ln();
        assert!((got - limit).abs() < 1e-3);
    }

    #[test]
    fn component_examples() {
        let table = NormTable::build(&mu(&[1.0]), 1, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let z = random_point(&mut rng, 2);
            let c = szego_component(&table, &[0, 0].into(), &z).unwrap();
            assert!((c - 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
        }
        let e1 = point(&[1.0, 0.0]);
        let c = szego_component(&table, &[1, 0].into(), &e1).unwrap();
        assert!((c - 1.0 / (2.0 * PI * PI)).abs() < 1e-15);
        assert_eq!(szego_component(&table, &[0, 3].into(), &e1).unwrap(), 0.0);
        assert!(matches!(szego_component(&table, &[9, 0].into(), &e1), Err(Error::MissingNorm(_))));
    }

    #[test]
    fn window_examples() {
        let table = NormTable::build(&mu(&[1.0]), 1, 100.0).unwrap();
        let z = point(&[0.3, 0.7]);
        assert!((szego_window(&table, 2.0, &z).unwrap() - 3.0 / (2.0 * PI * PI)).abs() < 1e-14);
        assert!((szego_window(&table, 2.0, &z).unwrap() - 0.151982).abs() < 1e-6);
        assert!((szego_window(&table, 100.0, &z).unwrap() - 5151.0 / (4.0 * PI * PI)).abs() < 1e-10);

        let wt = NormTable::build(&mu(&[1.0, SQRT_2]), 1, 10.0).unwrap();
        let s0 = szego_window(&wt, 0.0, &z).unwrap();
        let n0 = wt.ln_norm_of(&[0, 0].into()).unwrap().exp();
        assert!((s0 - 1.0 / n0).abs() < 1e-15);
        assert!(szego_window(&wt, 11.0, &z).is_err());
    }

    #[test]
    fn weighted_examples() {
        let table = NormTable::build(&mu(&[1.0]), 1, 60.0).unwrap();
        let z = point(&[0.6, 0.4]);
        let zero = CutoffFunction::zero();
        assert_eq!(szego_weighted(&table, &zero, 50.0, &z).unwrap(), 0.0);

        let tau = CutoffFunction::smooth_bump(0.1, 0.9).unwrap();
        let k = 50.0;
        let oracle: f64 = (0..=50).map(|m| tau.eval(m as f64 / k) * (m + 1) as f64).sum::<f64>() / (4.0 * PI * PI);
        assert!((szego_weighted(&table, &tau, k, &z).unwrap() - oracle).abs() < 1e-14 * oracle.max(1.0));

        let cos = CutoffFunction::new(CutoffFamily::RaisedCosine, 0.2, 0.95).unwrap();
        assert!(szego_weighted(&table, &cos, k, &z).unwrap() <= szego_window(&table, k, &z).unwrap());
        let ind = CutoffFunction::indicator(0.0, 1.0).unwrap();
        assert!(szego_weighted(&table, &ind, k, &z).is_err());
    }

    #[test]
    fn trace_identity_small() {
        let w = mu(&[1.0, SQRT_2]);
        let table = NormTable::build(&w, 1, 12.0).unwrap();
        let rule = SimplexRule::new(1, 120).unwrap();
        for k in [0.0, 3.0, 7.5, 12.0] {
            let tr = integrate_window_kernel(&table, k, &rule).unwrap();
            let count = count_weights(&w, k) as f64;
            assert!((tr / count - 1.0).abs() < 1e-8, "k={k}: {tr} vs {count}");
        }
        let tau = CutoffFunction::smooth_bump(0.1, 0.9).unwrap();
        let k = 12.0;
        let tr = integrate_weighted_kernel(&table, &tau, k, &rule).unwrap();
        let expected: f64 = enumerate_weights(&WeightVector::new(vec![1.0, SQRT_2]).unwrap(), 0.0, k)
            .iter()
            .map(|p| tau.eval(crate::lattice::weight_value(&w, p).unwrap() / k))
            .sum();
        assert!((tr / expected - 1.0).abs() < 1e-8);
    }

    #[test]
    fn homogeneity_and_phase_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let diag = NormTable::build(&mu(&[1.0]), 1, 40.0).unwrap();
        let reference = szego_window(&diag, 40.0, &point(&[1.0, 0.0])).unwrap();
        for _ in 0..50 {
            let z = random_point(&mut rng, 2);
            assert!((szego_window(&diag, 40.0, &z).unwrap() - reference).abs() < 1e-8 * reference);
        }
        let table = NormTable::build(&mu(&[1.0, SQRT_2]), 1, 30.0).unwrap();
        let tau = CutoffFunction::smooth_bump(0.1, 0.9).unwrap();
        for _ in 0..20 {
            let t0: f64 = rng.random_range(0.0..1.0);
            let t = [t0, 1.0 - t0];
            let a = point(&t);
            let b = SpherePoint::from_simplex_with_phases(&t, &[rng.random_range(0.0..6.3), rng.random_range(0.0..6.3)]).unwrap();
            let (sa, sb) = (szego_window(&table, 30.0, &a).unwrap(), szego_window(&table, 30.0, &b).unwrap());
            assert!((sa - sb).abs() <= 1e-12 * sa);
            let (wa, wb) = (szego_weighted(&table, &tau, 30.0, &a).unwrap(), szego_weighted(&table, &tau, 30.0, &b).unwrap());
            assert!((wa - wb).abs() <= 1e-12 * wa.max(1e-300));
        }
    }

    #[test]
    fn monotone_in_k() {
        let table = NormTable::build(&mu(&[1.0, SQRT_2]), 1, 40.0).unwrap();
        let ks: Vec<f64> = (0..=80).map(|i| i as f64 * 0.5).collect();
        let z = point(&[0.35, 0.65]);
        let sweep = szego_window_sweep(&table, &ks, &z).unwrap();
        assert!(sweep.windows(2).all(|w| w[0] <= w[1]));
        for (k, s) in ks.iter().zip(&sweep) {
            let single = szego_window(&table, *k, &z).unwrap();
            assert!((s - single).abs() <= 1e-14 * single);
        }
    }

    #[test]
    fn extremal_examples() {
        let table = NormTable::build(&mu(&[1.0, SQRT_2]), 1, 8.0).unwrap();
        let z = SpherePoint::from_simplex_with_phases(&[0.4, 0.6], &[0.3, -1.1]).unwrap();
        let single = extremal_check(&table, 8.0, &z, &[([2, 1].into(), Complex64::new(1.0, 0.0))]).unwrap();
        let sp = szego_component(&table, &[2, 1].into(), &z).unwrap();
        assert!((single.ratio - sp).abs() < 1e-14 * sp);
        assert!(single.ratio <= single.bound);

        let rk = reproducing_coefficients(&table, 8.0, &z).unwrap();
        let eq = extremal_check(&table, 8.0, &z, &rk).unwrap();
        assert!((eq.ratio / eq.bound - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let window = enumerate_weights(&WeightVector::new(vec![1.0, SQRT_2]).unwrap(), 0.0, 8.0);
        for _ in 0..100 {
            let coeffs: Vec<_> = window
                .iter()
                .map(|p| (p.clone(), Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))))
                .collect();
            let r = extremal_check(&table, 8.0, &z, &coeffs).unwrap();
            assert!(r.ratio <= r.bound * (1.0 + 1e-9));
        }
        assert!(matches!(
            extremal_check(&table, 8.0, &z, &[([1, 0].into(), Complex64::new(0.0, 0.0))]),
            Err(Error::ZeroFunction)
        ));
        assert!(extremal_check(&table, 2.0, &z, &[([5, 0].into(), Complex64::new(1.0, 0.0))]).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let table = NormTable::build(&mu(&[1.0, SQRT_2]), 1, 25.0).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let back = NormTable::read_csv(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(back, table);
        let mut corrupted = String::from_utf8(buf).unwrap();
        corrupted = corrupted.replacen("k_max=", "k_max=3", 1);
        assert!(NormTable::read_csv(std::io::Cursor::new(corrupted.as_bytes())).is_err());
    }

    #[test]
    fn diagonal_table_matches_closed_form() {
        let table = NormTable::build(&mu(&[1.0]), 1, 30.0).unwrap();
        for k in [0usize, 1, 5, 30] {
            let s = szego_window(&table, k as f64, &point(&[0.2, 0.8])).unwrap();
            assert!((s / diagonal_window(k) - 1.0).abs() < 1e-13);
        }
    }
}
