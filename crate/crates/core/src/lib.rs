//! Linearized boundary control reconstruction of a damping perturbation in the
//! one-dimensional damped wave equation `rho u_tt + sigma u_t - u_xx = 0`.
//!
//! The pipeline synthesizes Neumann controls by time reversal, measures the
//! linearized Neumann-to-Dirichlet map with a leapfrog solver, evaluates the
//! linearized boundary identity for sine/cosine targets and assembles the Fourier
//! series of the perturbation.

// Negated comparisons are used on purpose so that NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod control;
pub mod error;
pub mod experiments;
pub mod extension;
pub mod grid;
pub mod identity;
pub mod quadrature;
pub mod recon;
pub mod solver;
pub mod trace;

pub use error::{Error, Result};
pub use extension::{AnalyticProfile, Antiderivative};
pub use grid::{GridSpec, MediumSpec};
pub use trace::BoundaryTrace;
