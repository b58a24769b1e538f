//! Command-line front end: experiment presets, config files, result files and
//! verification studies.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use bcm_core::checks::{self, CheckLine};
use bcm_core::experiments::{experiment, ExperimentId};
use bcm_core::recon::reconstruct;
use bcm_core::GridSpec;
use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{parse_config, Overrides, RunConfig};
use crate::output::{emit_results, ResolvedConfig, Summary};

#[derive(Debug, Parser)]
#[command(name = "bcm", version, about = "Damping reconstruction by the linearized boundary control method")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a preset: 1 smooth, 2 piecewise constant, 3 nonlinear-difference data.
    Experiment {
        #[arg(long)]
        id: u32,
        /// Relative noise level of the measurements.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of sine/cosine pairs.
        #[arg(long = "N")]
        n_modes: Option<usize>,
        #[arg(long)]
        dx: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Half of the measurement time.
        #[arg(long = "T")]
        t_half: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run from a `key = value` config file.
    Reconstruct {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verification studies; the exit status is nonzero if any tolerance fails.
    Check {
        #[arg(value_enum)]
        kind: CheckKind,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Identity,
    Control,
    Convergence,
}

/// Bound on the noiseless relative error of each preset.
pub fn noiseless_tolerance(id: ExperimentId) -> f64 {
    match id {
        ExperimentId::Smooth | ExperimentId::Piecewise => 1e-2,
        ExperimentId::Nonlinear => 5e-2,
    }
}

/// Runs the configured preset and writes its result files.
pub fn run_experiment(cfg: &RunConfig) -> Result<Summary> {
    let out_dir = cfg.out_dir.as_deref().context("no output directory given")?;
    let settings = cfg.settings()?;
    let exp = experiment(cfg.experiment, &settings)?;
    log::info!(
        "experiment {} with N = {}, noise = {}, seed = {}, {} x {} nodes",
        cfg.experiment,
        cfg.n_modes,
        cfg.noise,
        cfg.seed,
        exp.settings.grid.nx(),
        exp.settings.grid.nt()
    );
    let start = Instant::now();
    let result = reconstruct(&exp.settings, &exp.medium, &exp.truth)?;
    let runtime = start.elapsed().as_secs_f64();
    let tolerance = (cfg.noise == 0.0).then(|| noiseless_tolerance(cfg.experiment));
    let summary = Summary {
        rel_l2: result.rel_l2,
        linf: result.linf,
        imaginary_leakage: result.imaginary_leakage,
        tolerance,
        passed: tolerance.is_none_or(|t| result.rel_l2 <= t),
        runtime_seconds: runtime,
        seed: cfg.seed,
        noise: cfg.noise,
        config: ResolvedConfig::new(
            cfg,
            &exp.settings.grid,
            exp.settings.data_mode,
            exp.settings.eps_linearization,
        ),
    };
    emit_results(&result, &exp.settings.grid, &summary, out_dir)?;
    Ok(summary)
}

fn report_run(summary: &Summary, out_dir: &Path) -> ExitCode {
    let bound = summary.tolerance.map(|t| format!(" (tolerance {t})")).unwrap_or_default();
    println!(
        "experiment {}: rel_l2 = {:.4e}{bound}, linf = {:.4e}, {:.1} s, results in {}",
        summary.config.experiment,
        summary.rel_l2,
        summary.linf,
        summary.runtime_seconds,
        out_dir.display()
    );
    if summary.passed {
        ExitCode::SUCCESS
    } else {
        println!("FAIL: relative error above tolerance");
        ExitCode::FAILURE
    }
}

/// Check lines of one verification study on the reference grid.
pub fn check_lines(kind: CheckKind) -> Result<Vec<CheckLine>> {
    let grid = GridSpec::standard();
    Ok(match kind {
        CheckKind::Identity => checks::identity_checks(&grid)?,
        CheckKind::Control => checks::control_checks(&grid, 10)?,
        CheckKind::Convergence => checks::convergence_checks(&checks::default_solver_study_grid(), &grid)?,
    })
}

pub fn run_check(kind: CheckKind) -> Result<ExitCode> {
    let lines = check_lines(kind)?;
    for l in &lines {
        println!("{l}");
    }
    let passed = lines.iter().filter(|l| l.passed()).count();
    println!("{passed}/{} checks passed", lines.len());
    Ok(if passed == lines.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Experiment {
            id,
            noise,
            seed,
            n_modes,
            dx,
            dt,
            t_half,
            out,
        } => {
            let mut cfg = RunConfig::default();
            cfg.apply(&Overrides {
                experiment: Some(id),
                noise,
                seed,
                n_modes,
                dx,
                dt,
                t_half,
                d: None,
                out_dir: Some(out.clone()),
            })?;
            let summary = run_experiment(&cfg)?;
            Ok(report_run(&summary, &out))
        }
        Command::Reconstruct { config, out } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("cannot read {}", config.display()))?;
            let mut cfg = RunConfig::default();
            cfg.apply(&parse_config(&text).with_context(|| format!("in {}", config.display()))?)?;
            cfg.apply(&Overrides {
                out_dir: out,
                ..Default::default()
            })?;
            let summary = run_experiment(&cfg)?;
            let out_dir = cfg.out_dir.expect("checked by run_experiment");
            Ok(report_run(&summary, &out_dir))
        }
        Command::Check { kind } => run_check(kind),
    }
}
