//! Resolved run configuration and the flat `key = value` file format.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use bcm_core::experiments::ExperimentId;
use bcm_core::extension::DEFAULT_EXTENSION_ORDER;
use bcm_core::recon::ReconSettings;
use bcm_core::GridSpec;

/// Everything a reconstruction run depends on; defaults are the reference setup.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentId,
    pub noise: f64,
    pub seed: u64,
    pub n_modes: usize,
    pub dx: f64,
    pub dt: f64,
    pub t_half: f64,
    pub d: u32,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentId::Smooth,
            noise: 0.0,
            seed: 0,
            n_modes: 10,
            dx: 1.0 / 250.0,
            dt: 1.0 / 2500.0,
            t_half: 5.0,
            d: DEFAULT_EXTENSION_ORDER,
            out_dir: None,
        }
    }
}

/// Values given explicitly, by file or flag; `None` keeps the current value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub experiment: Option<u32>,
    pub noise: Option<f64>,
    pub seed: Option<u64>,
    pub n_modes: Option<usize>,
    pub dx: Option<f64>,
    pub dt: Option<f64>,
    pub t_half: Option<f64>,
    pub d: Option<u32>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(id) = o.experiment {
            self.experiment = ExperimentId::try_from(id)?;
        }
        self.noise = o.noise.unwrap_or(self.noise);
        self.seed = o.seed.unwrap_or(self.seed);
        self.n_modes = o.n_modes.unwrap_or(self.n_modes);
        self.dx = o.dx.unwrap_or(self.dx);
        self.dt = o.dt.unwrap_or(self.dt);
        self.t_half = o.t_half.unwrap_or(self.t_half);
        self.d = o.d.unwrap_or(self.d);
        if let Some(p) = &o.out_dir {
            self.out_dir = Some(p.clone());
        }
        Ok(())
    }

    /// Grid on `[-1, 1]`, checked for integrality, the time-reversal horizon and CFL.
    pub fn grid(&self) -> Result<GridSpec> {
        let g = GridSpec::new(-1.0, 1.0, self.dx, self.dt, self.t_half).context("invalid grid")?;
        g.check_cfl(1.0).context("invalid grid")?;
        Ok(g)
    }

    pub fn settings(&self) -> Result<ReconSettings> {
        let s = ReconSettings {
            n_modes: self.n_modes,
            grid: self.grid()?,
            noise_eps: self.noise,
            seed: self.seed,
            d: self.d,
            ..Default::default()
        };
        s.validate().context("invalid reconstruction settings")?;
        Ok(s)
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow::anyhow!("line {line}: invalid value {value:?} for {key}: {e}"))
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are ignored.
pub fn parse_config(text: &str) -> Result<Overrides> {
    let mut o = Overrides::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            bail!("line {line}: expected `key = value`, got {content:?}");
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "experiment" | "id" => o.experiment = Some(parse_value(key, value, line)?),
            "noise" => o.noise = Some(parse_value(key, value, line)?),
            "seed" => o.seed = Some(parse_value(key, value, line)?),
            "N" => o.n_modes = Some(parse_value(key, value, line)?),
            "dx" => o.dx = Some(parse_value(key, value, line)?),
            "dt" => o.dt = Some(parse_value(key, value, line)?),
            "T" => o.t_half = Some(parse_value(key, value, line)?),
            "d" => o.d = Some(parse_value(key, value, line)?),
            "out" => o.out_dir = Some(PathBuf::from(value)),
            _ => bail!("line {line}: unknown key {key:?}"),
        }
    }
    Ok(o)
}
