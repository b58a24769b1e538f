//! Preset reconstruction problems on `[-1, 1]` with the unit background.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::grid::MediumSpec;
use crate::recon::{piecewise_truth, projection_truth, DataMode, ReconSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentId {
    /// Smooth perturbation, linearized data.
    Smooth = 1,
    /// Piecewise-constant perturbation against its Fourier projection, linearized data.
    Piecewise = 2,
    /// Smooth perturbation, nonlinear-difference data with a rough second-order term.
    Nonlinear = 3,
}

impl TryFrom<u32> for ExperimentId {
    type Error = Error;

    fn try_from(id: u32) -> Result<Self> {
        match id {
            1 => Ok(Self::Smooth),
            2 => Ok(Self::Piecewise),
            3 => Ok(Self::Nonlinear),
            _ => Err(Error::Config(format!("experiment id must be 1, 2 or 3, got {id}"))),
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", *self as u32)
    }
}

/// `cos(pi x) + cos(2 pi x) + cos(3 pi x) + sin(4 pi x) + 4`.
pub fn smooth_truth(x: f64) -> f64 {
    (PI * x).cos() + (2.0 * PI * x).cos() + (3.0 * PI * x).cos() + (4.0 * PI * x).sin() + 4.0
}

/// `200 sin(20 pi x)`.
pub fn second_order_term(x: f64) -> f64 {
    200.0 * (20.0 * PI * x).sin()
}

/// Perturbation size of the nonlinear-difference preset.
pub const NONLINEAR_EPS: f64 = 1e-3;

/// A fully specified reconstruction problem.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub id: ExperimentId,
    pub settings: ReconSettings,
    pub medium: MediumSpec,
    /// Reference the reconstruction is scored against.
    pub truth: Vec<f64>,
}

/// Builds preset `id` on the grid, truncation, noise and seed of `base`.
///
/// The data mode and linearization size are fixed by the preset.
pub fn experiment(id: ExperimentId, base: &ReconSettings) -> Result<Experiment> {
    let grid = &base.grid;
    let mut settings = base.clone();
    let (medium, truth) = match id {
        ExperimentId::Smooth => {
            settings.data_mode = DataMode::Linearized;
            let s = grid.sample(smooth_truth);
            (MediumSpec::unit_background(s.clone()), s)
        }
        ExperimentId::Piecewise => {
            settings.data_mode = DataMode::Linearized;
            (
                MediumSpec::unit_background(grid.sample(piecewise_truth)),
                projection_truth(settings.n_modes, grid),
            )
        }
        ExperimentId::Nonlinear => {
            settings.data_mode = DataMode::NonlinearDifference;
            settings.eps_linearization = NONLINEAR_EPS;
            let s = grid.sample(smooth_truth);
            let medium = MediumSpec::unit_background(s.clone()).with_sigma_ddot(grid.sample(second_order_term));
            (medium, s)
        }
    };
    settings.validate()?;
    medium.validate(grid)?;
    Ok(Experiment {
        id,
        settings,
        medium,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn base() -> ReconSettings {
        ReconSettings {
            grid: GridSpec::new(-1.0, 1.0, 0.02, 0.002, 5.0).unwrap(),
            n_modes: 4,
            ..Default::default()
        }
    }

    #[test]
    fn ids_round_trip() {
        for id in 1..=3 {
            assert_eq!(ExperimentId::try_from(id).unwrap() as u32, id);
        }
        assert!(ExperimentId::try_from(0).is_err());
        assert!(ExperimentId::try_from(4).is_err());
    }

    #[test]
    fn presets_fix_data_mode() {
        let e1 = experiment(ExperimentId::Smooth, &base()).unwrap();
        assert_eq!(e1.settings.data_mode, DataMode::Linearized);
        assert_eq!(e1.truth, e1.medium.sigma_dot);
        let e2 = experiment(ExperimentId::Piecewise, &base()).unwrap();
        assert_ne!(e2.truth, e2.medium.sigma_dot);
        let e3 = experiment(ExperimentId::Nonlinear, &base()).unwrap();
        assert_eq!(e3.settings.data_mode, DataMode::NonlinearDifference);
        assert_eq!(e3.settings.eps_linearization, 1e-3);
        assert!(e3.medium.sigma_ddot.is_some());
    }

    #[test]
    fn smooth_truth_values() {
        assert!((smooth_truth(0.0) - 7.0).abs() < 1e-14);
        assert!((smooth_truth(1.0) - 3.0).abs() < 1e-12);
        assert!(second_order_term(0.025).abs() > 199.9);
    }
}
