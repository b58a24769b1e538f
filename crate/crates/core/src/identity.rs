//! Boundary identities expressing interior inner products at `t = T` through boundary data.
//!
//! All pairings are bilinear over `(0, T) x {a, b}`; reflected factors are sampled at
//! `2T - t` by exact index reversal.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::quadrature::trapezoid;
use crate::solver::solve;
use crate::trace::{bilinear_time_boundary_pairing, discrete_sobolev_norm, reflect_trace, BoundaryTrace};

/// Denominator floor of the relative residual.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

/// Relative tolerance of the stability inequality, absorbing the discretization of the norms.
pub const STABILITY_TOLERANCE: f64 = 0.05;

/// Boundary data of a control pair `(f, h)` together with the linearized measurements.
#[derive(Debug, Clone)]
pub struct PairData {
    pub f: BoundaryTrace,
    pub f_t: BoundaryTrace,
    pub h: BoundaryTrace,
    pub h_t: BoundaryTrace,
    pub h_tt: BoundaryTrace,
    pub lam_f_t: BoundaryTrace,
    pub lam_h_t: BoundaryTrace,
    pub lam_h_tt: BoundaryTrace,
    /// Undifferentiated measurements, needed only by the stability check.
    pub lam_f: Option<BoundaryTrace>,
    pub lam_h: Option<BoundaryTrace>,
    pub lambda: Complex64,
    /// Background velocity snapshots `p0(T)` driven by `f` and `h`.
    pub p_f: Vec<Complex64>,
    pub p_h: Vec<Complex64>,
    pub t_half: f64,
}

impl PairData {
    fn check(&self) -> Result<()> {
        for t in [&self.f_t, &self.h, &self.h_t, &self.h_tt, &self.lam_f_t, &self.lam_h_t, &self.lam_h_tt] {
            self.f.check_same_grid(t)?;
        }
        for t in [&self.lam_f, &self.lam_h].into_iter().flatten() {
            self.f.check_same_grid(t)?;
        }
        if self.p_f.len() != self.p_h.len() {
            return Err(Error::GridMismatch(format!(
                "snapshot lengths differ: {} vs {}",
                self.p_f.len(),
                self.p_h.len()
            )));
        }
        Ok(())
    }
}

/// Boundary side of the linearized identity.
///
/// `-[f lam_h_t](T) - <f, R lam_h_tt> + <lam_f_t, R h_t> - lambda <f, R lam_h_t>
/// + lambda <lam_f_t, R h>`, summed over both endpoints, with `R` the reflection `t -> 2T - t`.
/// Equals `int sigma_dot p_f(T) p_h(T) / rho0`.
pub fn linearized_rhs(pd: &PairData) -> Result<Complex64> {
    pd.check()?;
    let t = pd.t_half;
    let pair = |g1: &BoundaryTrace, g2: &BoundaryTrace| bilinear_time_boundary_pairing(g1, &reflect_trace(g2), t);
    let mid = (t / pd.f.dt()).round() as usize;
    let boundary: Complex64 = pd
        .f
        .at(mid)
        .iter()
        .zip(pd.lam_h_t.at(mid))
        .map(|(x, y)| x * y)
        .sum();
    Ok(-boundary - pair(&pd.f, &pd.lam_h_tt)? + pair(&pd.lam_f_t, &pd.h_t)?
        - pd.lambda * pair(&pd.f, &pd.lam_h_t)?
        + pd.lambda * pair(&pd.lam_f_t, &pd.h)?)
}

/// `int_a^b sigma_dot p_f p_h dx` by trapezoid, without conjugation.
pub fn weighted_volume_pairing(
    p_f: &[Complex64],
    p_h: &[Complex64],
    sigma_dot: &[f64],
    grid: &GridSpec,
) -> Result<Complex64> {
    let n = grid.nx();
    if p_f.len() != n || p_h.len() != n || sigma_dot.len() != n {
        return Err(Error::GridMismatch(format!(
            "expected {n} samples, got {}, {} and {}",
            p_f.len(),
            p_h.len(),
            sigma_dot.len()
        )));
    }
    let integrand: Vec<Complex64> = p_f.iter().zip(p_h).zip(sigma_dot).map(|((x, y), s)| x * y * s).collect();
    Ok(trapezoid(&integrand, grid.dx()))
}

/// Neumann datum together with its time derivative.
#[derive(Debug, Clone)]
pub struct NeumannInput {
    pub f: BoundaryTrace,
    pub f_t: BoundaryTrace,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResidual {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub rel_residual: f64,
}

impl IdentityResidual {
    pub fn new(lhs: Complex64, rhs: Complex64) -> Self {
        let den = lhs.norm().max(rhs.norm()).max(RESIDUAL_FLOOR);
        Self {
            lhs,
            rhs,
            rel_residual: (lhs - rhs).norm() / den,
        }
    }

    pub fn abs_residual(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }
}

/// Full (nonlinear) identity for damping `sigma`:
/// `int p^f p^h - q^f q^h at t = T` against `<f, R Lambda h_t> - <Lambda f_t, R h>`.
pub fn nonlinear_identity_residual(
    f: &NeumannInput,
    h: &NeumannInput,
    rho0: f64,
    sigma: &[f64],
    grid: &GridSpec,
) -> Result<IdentityResidual> {
    let sf = solve(grid, rho0, sigma, &f.f, None)?;
    let sh = solve(grid, rho0, sigma, &h.f, None)?;
    let lam_f_t = solve(grid, rho0, sigma, &f.f_t, None)?.dirichlet;
    let lam_h_t = solve(grid, rho0, sigma, &h.f_t, None)?.dirichlet;

    let volume: Vec<Complex64> = sf
        .p_snapshot
        .iter()
        .zip(&sh.p_snapshot)
        .zip(sf.q_snapshot.iter().zip(&sh.q_snapshot))
        .map(|((pf, ph), (qf, qh))| pf * ph - qf * qh)
        .collect();
    let lhs = trapezoid(&volume, grid.dx());

    let t = grid.t_half();
    let rhs = bilinear_time_boundary_pairing(&f.f, &reflect_trace(&lam_h_t), t)?
        - bilinear_time_boundary_pairing(&lam_f_t, &reflect_trace(&h.f), t)?;
    Ok(IdentityResidual::new(lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub lhs_abs: f64,
    pub bound: f64,
    pub ok: bool,
}

/// Trace-level bound on the boundary side of the linearized identity:
/// `(2 + |lambda|) |f|_{H1} |lam_h|_{H2} + (1 + |lambda|) |lam_f|_{H2} |h|_{H1}`.
///
/// Norms are taken over the whole window `(0, 2T)` because the reflected factors sample
/// the measurements on `(T, 2T)`.
pub fn stability_bound_check(pd: &PairData) -> Result<StabilityReport> {
    let (lam_f, lam_h) = match (&pd.lam_f, &pd.lam_h) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(Error::Precondition(
                "stability check needs the undifferentiated measurements".into(),
            ))
        }
    };
    let lhs_abs = linearized_rhs(pd)?.norm();
    let window = 2.0 * pd.t_half;
    let l = pd.lambda.norm();
    let bound = (2.0 + l) * discrete_sobolev_norm(&pd.f, 1, window)? * discrete_sobolev_norm(lam_h, 2, window)?
        + (1.0 + l) * discrete_sobolev_norm(lam_f, 2, window)? * discrete_sobolev_norm(&pd.h, 1, window)?;
    Ok(StabilityReport {
        lhs_abs,
        bound,
        ok: lhs_abs <= bound * (1.0 + STABILITY_TOLERANCE),
    })
}
