use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use szego_lab::config::ExperimentConfig;
use szego_lab::run::{run_geometry, run_model_verify, run_sweep, run_verify, RunOptions, VerifyOutcome};

/// Szegő kernel experiments on weighted spheres.
#[derive(Parser)]
#[command(name = "szego-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Contact scale, Levi determinant and volume density at each point.
    Geometry(Common),
    /// Kernel values over `k_list` at each point.
    Sweep(Common),
    /// Fit the leading coefficients and compare with the predicted values.
    Verify(Common),
    /// Bergman series and window-bound checks on the model spaces.
    ModelVerify(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    workers: Option<usize>,
    /// Relative tolerance for `verify`, overriding the configuration.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Seed for every random draw, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

const EXIT_TOLERANCE: u8 = 1;
const EXIT_INPUT: u8 = 2;

fn report(outcome: VerifyOutcome) -> ExitCode {
    for line in &outcome.lines {
        println!("{line}");
    }
    println!("report: {}", outcome.report_path.display());
    if outcome.pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("tolerance exceeded");
        ExitCode::from(EXIT_TOLERANCE)
    }
}

fn run(command: Command) -> Result<ExitCode> {
    let (Command::Geometry(c) | Command::Sweep(c) | Command::Verify(c) | Command::ModelVerify(c)) = &command;
    if let Some(workers) = c.workers {
        rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build_global().context("starting worker pool")?;
    }
    if let Some(t) = c.tolerance {
        anyhow::ensure!(t.is_finite() && t >= 0.0, "tolerance must be a nonnegative number");
    }
    let cfg = ExperimentConfig::load(&c.config).with_context(|| format!("reading {}", c.config.display()))?;
    let opts = RunOptions { out: c.out.clone(), tolerance: c.tolerance, seed: c.seed };
    Ok(match command {
        Command::Geometry(_) => {
            println!("wrote {}", run_geometry(&cfg, &opts)?.display());
            ExitCode::SUCCESS
        }
        Command::Sweep(_) => {
            let (path, _) = run_sweep(&cfg, &opts)?;
            println!("wrote {}", path.display());
            ExitCode::SUCCESS
        }
        Command::Verify(_) => report(run_verify(&cfg, &opts)?),
        Command::ModelVerify(_) => report(run_model_verify(&cfg, &opts)?),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
