//! CSV and JSON result files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use bcm_core::recon::{DataMode, ReconResult};
use bcm_core::GridSpec;
use serde::Serialize;

use crate::config::RunConfig;

pub const RECONSTRUCTION_FILE: &str = "reconstruction.csv";
pub const COEFFICIENTS_FILE: &str = "coefficients.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// Fully resolved configuration, enough to reproduce a run.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ResolvedConfig {
    pub experiment: u32,
    pub noise: f64,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n_modes: usize,
    pub a: f64,
    pub b: f64,
    pub dx: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_half: f64,
    pub d: u32,
    pub rho0: f64,
    pub sigma0: f64,
    pub data_mode: String,
    pub eps_linearization: Option<f64>,
}

impl ResolvedConfig {
    pub fn new(cfg: &RunConfig, grid: &GridSpec, data_mode: DataMode, eps: f64) -> Self {
        let nonlinear = data_mode == DataMode::NonlinearDifference;
        Self {
            experiment: cfg.experiment as u32,
            noise: cfg.noise,
            seed: cfg.seed,
            n_modes: cfg.n_modes,
            a: grid.a(),
            b: grid.b(),
            dx: grid.dx(),
            dt: grid.dt(),
            t_half: grid.t_half(),
            d: cfg.d,
            rho0: 1.0,
            sigma0: 0.0,
            data_mode: if nonlinear { "nonlinear_difference" } else { "linearized" }.into(),
            eps_linearization: nonlinear.then_some(eps),
        }
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary {
    pub rel_l2: f64,
    pub linf: f64,
    pub imaginary_leakage: f64,
    /// Declared bound on `rel_l2`, when the run has one.
    pub tolerance: Option<f64>,
    pub passed: bool,
    pub runtime_seconds: f64,
    pub seed: u64,
    pub noise: f64,
    pub config: ResolvedConfig,
}

fn reconstruction_csv(result: &ReconResult, grid: &GridSpec) -> String {
    let mut s = String::from("x,sigma_true,sigma_recon_re,sigma_recon_im\n");
    for ((x, t), r) in grid.xs().iter().zip(&result.truth).zip(&result.sigma_recon) {
        writeln!(s, "{x},{t},{},{}", r.re, r.im).expect("writing to a string");
    }
    s
}

fn coefficients_csv(result: &ReconResult) -> String {
    let c = &result.coeffs;
    let mut s = String::from("k,a_re,a_im,b_re,b_im\n");
    writeln!(s, "0,{},{},0,0", c.a0.re, c.a0.im).expect("writing to a string");
    for (k, (a, b)) in c.a.iter().zip(&c.b).enumerate() {
        writeln!(s, "{},{},{},{},{}", k + 1, a.re, a.im, b.re, b.im).expect("writing to a string");
    }
    s
}

/// Writes the reconstruction, coefficient and summary files into `out_dir`.
pub fn emit_results(result: &ReconResult, grid: &GridSpec, summary: &Summary, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).with_context(|| format!("cannot create {}", out_dir.display()))?;
    let write = |name: &str, body: String| {
        let path = out_dir.join(name);
        fs::write(&path, body).with_context(|| format!("cannot write {}", path.display()))
    };
    write(RECONSTRUCTION_FILE, reconstruction_csv(result, grid))?;
    write(COEFFICIENTS_FILE, coefficients_csv(result))?;
    write(SUMMARY_FILE, serde_json::to_string_pretty(summary)? + "\n")?;
    Ok(())
}
