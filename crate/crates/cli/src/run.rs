//! The subcommand runners. Each one writes its files under the output
//! directory and returns what the caller needs for the exit code.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use szego_core::asymptotics::{verify, AsymptoticReport, KernelSweep};
use szego_core::cutoff::CutoffFunction;
use szego_core::hardy::{szego_weighted_sweep, szego_window_sweep, NormMethod, NormTable};
use szego_core::lattice::LatticePoint;
use szego_core::quadrature::{monte_carlo_sphere, SimplexRule};
use szego_core::sphere::{contact_scale, det_levi, volume_density, volume_density_closed_form, SpherePoint};

use crate::config::{ExperimentConfig, Instance, NormMethodChoice};
use crate::model_check::{check_models, ModelSummary};

pub const GEOMETRY_FILE: &str = "geometry.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const REPORT_FILE: &str = "report.json";
pub const MODEL_REPORT_FILE: &str = "model_report.json";
pub const DEFAULT_CACHE_FILE: &str = "norm_table.csv";

/// Command-line overrides shared by all runners.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: PathBuf,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
}

/// Floats in CSV output: 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn require_instance(cfg: &ExperimentConfig) -> Result<&Instance> {
    cfg.instance.as_ref().context("configuration has no sphere instance (n, mu)")
}

fn create(out: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok((path, BufWriter::new(file)))
}

/// Per-point contact scale, Levi determinant and volume density.
pub fn run_geometry(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<PathBuf> {
    let inst = require_instance(cfg)?;
    let rows = inst
        .points
        .par_iter()
        .map(|p| -> Result<[f64; 3]> {
            Ok([contact_scale(&inst.mu, &p.point)?, det_levi(&inst.mu, &p.point)?, volume_density(&inst.mu, &p.point)?])
        })
        .collect::<Result<Vec<_>>>()?;
    let (path, out) = create(&opts.out, GEOMETRY_FILE)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["point_id".to_string()];
    header.extend((1..=inst.n + 1).map(|j| format!("t{j}")));
    header.extend(["m", "det_levi", "volume_density"].map(String::from));
    w.write_record(&header)?;
    for (p, row) in inst.points.iter().zip(rows) {
        let mut rec = vec![p.id.clone()];
        rec.extend(p.point.moduli_sq().into_iter().map(fmt_float));
        rec.extend(row.into_iter().map(fmt_float));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(path)
}

/// Whether the norm table came from the cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheStatus {
    Hit,
    Built,
    Rebuilt,
}

fn largest_window_end(inst: &Instance) -> f64 {
    let k_max = inst.k_list.last().copied().unwrap_or(0.0);
    k_max * inst.tau.map_or(1.0, |t| t.b.max(1.0))
}

fn wanted_method(inst: &Instance) -> NormMethod {
    match inst.norm_method {
        NormMethodChoice::Series => NormMethod::Series,
        NormMethodChoice::Quadrature => NormMethod::Quadrature { degree: inst.quadrature_degree },
    }
}

/// Loads the cached table when it covers this instance, otherwise builds it
/// and rewrites the cache.
pub fn load_or_build_table(inst: &Instance, out: &Path) -> Result<(NormTable, CacheStatus)> {
    let path = inst.norm_cache.clone().unwrap_or_else(|| out.join(DEFAULT_CACHE_FILE));
    let k_needed = largest_window_end(inst);
    let method = wanted_method(inst);
    let mut status = CacheStatus::Built;
    if path.exists() {
        match File::open(&path).map_err(anyhow::Error::from).and_then(|f| Ok(NormTable::read_csv(BufReader::new(f))?)) {
            Ok(table) => {
                let key = table.key();
                let same_instance = key.n == inst.n
                    && key.method == method
                    && key.weights.len() == inst.mu.dim()
                    && key.weights.iter().zip(inst.mu.entries()).all(|(a, b)| a.to_bits() == b.to_bits());
                if same_instance && key.k_max >= k_needed {
                    return Ok((table, CacheStatus::Hit));
                }
                eprintln!(
                    "warning: norm cache {} does not match this configuration (n, weights, method or range); rebuilding",
                    path.display()
                );
            }
            Err(e) => eprintln!("warning: unreadable norm cache {} ({e:#}); rebuilding", path.display()),
        }
        status = CacheStatus::Rebuilt;
    }
    let table = match method {
        NormMethod::Series => NormTable::build(&inst.mu, inst.n, k_needed)?,
        NormMethod::Quadrature { degree } => {
            NormTable::build_by_quadrature(&inst.mu, inst.n, k_needed, &SimplexRule::new(inst.n, degree)?)?
        }
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    table.write_csv(&mut w)?;
    w.flush()?;
    Ok((table, status))
}

/// Kernel values for every point over the configured `k_list`.
pub struct SweepData {
    pub ks: Vec<f64>,
    /// `S_k` per point, in `k_list` order.
    pub window: Vec<Vec<f64>>,
    /// `S_{k,τ}` per point when a cutoff is configured.
    pub weighted: Option<Vec<Vec<f64>>>,
    pub cache: CacheStatus,
    pub table: NormTable,
}

pub fn compute_sweep(inst: &Instance, out: &Path) -> Result<SweepData> {
    let (table, cache) = load_or_build_table(inst, out)?;
    let ks = inst.k_list.clone();
    let window = inst
        .points
        .par_iter()
        .map(|p| szego_window_sweep(&table, &ks, &p.point))
        .collect::<szego_core::Result<Vec<_>>>()?;
    let weighted = match &inst.tau {
        Some(tau) => {
            if ks.iter().any(|k| *k <= 0.0) {
                bail!("a cutoff sweep needs k > 0");
            }
            Some(
                inst.points
                    .par_iter()
                    .map(|p| szego_weighted_sweep(&table, tau, &ks, &p.point))
                    .collect::<szego_core::Result<Vec<_>>>()?,
            )
        }
        None => None,
    };
    Ok(SweepData { ks, window, weighted, cache, table })
}

/// Writes `k, point_id, S_k[, S_k_tau]`, rows ordered by `k` then by point.
pub fn run_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<(PathBuf, CacheStatus)> {
    let inst = require_instance(cfg)?;
    let data = compute_sweep(inst, &opts.out)?;
    let (path, out) = create(&opts.out, SWEEP_FILE)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k", "point_id", "S_k"];
    if data.weighted.is_some() {
        header.push("S_k_tau");
    }
    w.write_record(&header)?;
    for (ki, k) in data.ks.iter().enumerate() {
        for (pi, p) in inst.points.iter().enumerate() {
            let mut rec = vec![fmt_float(*k), p.id.clone(), fmt_float(data.window[pi][ki])];
            if let Some(wt) = &data.weighted {
                rec.push(fmt_float(wt[pi][ki]));
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok((path, data.cache))
}

#[derive(Debug, Serialize)]
pub struct PointReport {
    pub id: String,
    pub t: Vec<f64>,
    pub contact_scale: f64,
    pub det_levi: f64,
    pub sharp_window: AsymptoticReport,
    pub cutoff: Option<AsymptoticReport>,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct MonteCarloCheck {
    pub exponent: Vec<i64>,
    pub table_norm: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub deviation_in_stderr: f64,
}

#[derive(Debug, Serialize)]
pub struct InstanceReport {
    pub n: usize,
    pub mu: Vec<f64>,
    pub k_list: Vec<f64>,
    pub tau: Option<CutoffFunction>,
    pub norm_cache: CacheStatus,
    pub points: Vec<PointReport>,
    pub monte_carlo: Vec<MonteCarloCheck>,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub tolerance: f64,
    pub pass: bool,
    pub instance: Option<InstanceReport>,
    pub model: Option<ModelSummary>,
}

/// Outcome of `verify` or `model-verify`.
pub struct VerifyOutcome {
    pub pass: bool,
    pub report_path: PathBuf,
    pub lines: Vec<String>,
}

fn verify_instance(inst: &Instance, cfg: &ExperimentConfig, opts: &RunOptions, tolerance: f64) -> Result<(InstanceReport, Vec<String>)> {
    if inst.k_list.len() < 2 {
        bail!("verify needs at least 2 entries in k_list");
    }
    if inst.k_list[0] <= 0.0 {
        bail!("verify needs k > 0");
    }
    let data = compute_sweep(inst, &opts.out)?;
    let mut lines = Vec::new();
    let mut points = Vec::new();
    for (pi, p) in inst.points.iter().enumerate() {
        let sweep = KernelSweep::new(data.ks.iter().copied().zip(data.window[pi].iter().copied()).collect())?;
        let sharp = verify(&sweep, &inst.mu, &p.point, None)?;
        let cutoff = match (&inst.tau, &data.weighted) {
            (Some(tau), Some(wt)) => {
                let sweep = KernelSweep::new(data.ks.iter().copied().zip(wt[pi].iter().copied()).collect())?;
                Some(verify(&sweep, &inst.mu, &p.point, Some(tau))?)
            }
            _ => None,
        };
        let best_error = |r: &AsymptoticReport| r.relative_error[&r.best];
        let pass = best_error(&sharp) <= tolerance && cutoff.as_ref().is_none_or(|r| best_error(r) <= tolerance);
        lines.push(format!(
            "{} {}: S_k fit {:.6e} vs {:.6e} (error {:.2e}){}",
            if pass { "ok  " } else { "FAIL" },
            p.id,
            sharp.fitted_leading,
            sharp.predicted["limit"],
            best_error(&sharp),
            cutoff.as_ref().map_or(String::new(), |r| format!(
                "; S_k,tau fit {:.6e}, best variant {} (error {:.2e})",
                r.fitted_leading,
                r.best,
                best_error(r)
            )),
        ));
        points.push(PointReport {
            id: p.id.clone(),
            t: p.point.moduli_sq(),
            contact_scale: contact_scale(&inst.mu, &p.point)?,
            det_levi: det_levi(&inst.mu, &p.point)?,
            sharp_window: sharp,
            cutoff,
            pass,
        });
    }

    let mut monte_carlo = Vec::new();
    if let Some(mc) = cfg.monte_carlo {
        let seed = opts.seed.unwrap_or(mc.seed);
        let n = inst.n;
        let mut exponents = vec![LatticePoint::zeros(n + 1)];
        let mut first = vec![0i64; n + 1];
        first[0] = 1;
        exponents.push(LatticePoint::from(&first[..]));
        for (i, p) in exponents.iter().enumerate() {
            let Ok(log_norm) = data.table.ln_norm_of(p) else { continue };
            let exps = p.entries().to_vec();
            let mu = inst.mu.clone();
            let est = monte_carlo_sphere(
                |t| {
                    let z = SpherePoint::from_simplex(t).expect("sampled moduli lie on the simplex");
                    let mono: f64 = exps.iter().zip(t).map(|(&q, x)| x.powi(q as i32)).product();
                    mono * volume_density_closed_form(&mu, &z).expect("dimensions agree")
                },
                n,
                mc.samples,
                seed.wrapping_add(i as u64),
            )?;
            let table_norm = log_norm.exp();
            let dev = if est.stderr > 0.0 { (est.estimate - table_norm).abs() / est.stderr } else { 0.0 };
            lines.push(format!(
                "info {}: Monte-Carlo norm {:.6e} +/- {:.1e} vs table {:.6e} ({dev:.2} stderr)",
                p, est.estimate, est.stderr, table_norm
            ));
            monte_carlo.push(MonteCarloCheck {
                exponent: exps,
                table_norm,
                estimate: est.estimate,
                stderr: est.stderr,
                deviation_in_stderr: dev,
            });
        }
    }
    Ok((
        InstanceReport {
            n: inst.n,
            mu: inst.mu.entries().to_vec(),
            k_list: inst.k_list.clone(),
            tau: inst.tau,
            norm_cache: data.cache,
            points,
            monte_carlo,
        },
        lines,
    ))
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let (path, mut w) = create(out, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(path)
}

/// Asymptotic verification per point, plus the model checks when configured.
/// Fails iff a best-matching relative error exceeds the tolerance, or a model check fails.
pub fn run_verify(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<VerifyOutcome> {
    let tolerance = opts.tolerance.unwrap_or(cfg.tolerance);
    let mut lines = Vec::new();
    let instance = match &cfg.instance {
        Some(inst) => {
            let (report, l) = verify_instance(inst, cfg, opts, tolerance)?;
            lines.extend(l);
            Some(report)
        }
        None => None,
    };
    let model = match &cfg.model {
        Some(block) => {
            let summary = check_models(block, opts.seed)?;
            lines.extend(summary.lines());
            Some(summary)
        }
        None => None,
    };
    let pass = instance.as_ref().is_none_or(|r| r.points.iter().all(|p| p.pass)) && model.as_ref().is_none_or(|m| m.pass);
    let report = VerifyReport { tolerance, pass, instance, model };
    let report_path = write_json(&opts.out, REPORT_FILE, &report)?;
    Ok(VerifyOutcome { pass, report_path, lines })
}

/// Model-space checks only.
pub fn run_model_verify(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<VerifyOutcome> {
    let block = cfg.model.as_ref().context("configuration has no model block")?;
    let summary = check_models(block, opts.seed)?;
    let lines = summary.lines();
    let pass = summary.pass;
    let report_path = write_json(&opts.out, MODEL_REPORT_FILE, &summary)?;
    Ok(VerifyOutcome { pass, report_path, lines })
}
