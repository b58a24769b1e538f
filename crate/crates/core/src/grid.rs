//! Space-time discretization of `(0, 2T) x (a, b)` and the medium sampled on it.

use crate::error::{Error, Result};

/// Relative tolerance used when deciding whether a ratio of grid lengths is an integer.
const INTEGER_RATIO_TOL: f64 = 1e-9;

fn integer_ratio(num: f64, den: f64, what: &str) -> Result<usize> {
    let r = num / den;
    let n = r.round();
    if n < 1.0 || (r - n).abs() > INTEGER_RATIO_TOL * n.max(1.0) {
        return Err(Error::Config(format!(
            "{what} must be a positive integer, got {r}"
        )));
    }
    Ok(n as usize)
}

/// Uniform grid on `[a, b] x [0, 2T]`.
///
/// Nodes are `x_i = a + i dx` for `i < nx` and samples are `t_j = j dt` for `j < nt`.
/// `T / dt` is an integer so `t = T` and the reflection `t -> 2T - t` land on nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    a: f64,
    b: f64,
    dx: f64,
    dt: f64,
    t_half: f64,
    cells: usize,
    half_steps: usize,
}

impl GridSpec {
    /// Builds a grid, validating the integrality invariants and `T >= (b - a) + 1`.
    pub fn new(a: f64, b: f64, dx: f64, dt: f64, t_half: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::Config(format!("need a < b, got a = {a}, b = {b}")));
        }
        if !(dx > 0.0 && dt > 0.0 && t_half > 0.0) {
            return Err(Error::Config(format!(
                "dx, dt and T must be positive (dx = {dx}, dt = {dt}, T = {t_half})"
            )));
        }
        let cells = integer_ratio(b - a, dx, "(b - a) / dx")?;
        let half_steps = integer_ratio(t_half, dt, "T / dt")?;
        if t_half < (b - a) + 1.0 - 1e-12 {
            return Err(Error::Config(format!(
                "T >= (b - a) + 1 is required for the time-reversal control, got T = {t_half}, b - a = {}",
                b - a
            )));
        }
        Ok(Self {
            a,
            b,
            dx,
            dt,
            t_half,
            cells,
            half_steps,
        })
    }

    /// `[-1, 1]`, `dx = 1/250`, `dt = 1/2500`, `T = 5`.
    pub fn standard() -> Self {
        Self::new(-1.0, 1.0, 1.0 / 250.0, 1.0 / 2500.0, 5.0).expect("reference grid is valid")
    }

    /// Same domain and `T` with both steps halved.
    pub fn refined(&self) -> Self {
        Self::new(self.a, self.b, self.dx / 2.0, self.dt / 2.0, self.t_half)
            .expect("refining a valid grid keeps it valid")
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Half of the measurement time, `T`.
    pub fn t_half(&self) -> f64 {
        self.t_half
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Number of spatial nodes.
    pub fn nx(&self) -> usize {
        self.cells + 1
    }

    /// Number of time samples on `[0, 2T]`.
    pub fn nt(&self) -> usize {
        2 * self.half_steps + 1
    }

    /// Index of the time sample `t = T`.
    pub fn mid_index(&self) -> usize {
        self.half_steps
    }

    pub fn x(&self, i: usize) -> f64 {
        self.a + i as f64 * self.dx
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx()).map(|i| self.x(i)).collect()
    }

    /// Courant number `dt / (dx sqrt(rho0))` for a constant density.
    pub fn courant(&self, rho0: f64) -> f64 {
        self.dt / (self.dx * rho0.sqrt())
    }

    pub fn check_cfl(&self, rho0: f64) -> Result<()> {
        if !(rho0 > 0.0) {
            return Err(Error::Config(format!("rho0 must be positive, got {rho0}")));
        }
        let c = self.courant(rho0);
        if c > 1.0 + 1e-12 {
            return Err(Error::Config(format!(
                "CFL condition dt / (dx sqrt(rho0)) <= 1 violated: {c}"
            )));
        }
        Ok(())
    }

    /// Samples a real function on the spatial nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.nx()).map(|i| f(self.x(i))).collect()
    }
}

/// Background coefficients and the damping perturbation on the spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumSpec {
    pub rho0: f64,
    pub sigma0: f64,
    pub sigma_dot: Vec<f64>,
    /// Second-order damping term, only used when data come from nonlinear differences.
    pub sigma_ddot: Option<Vec<f64>>,
}

impl MediumSpec {
    pub fn new(rho0: f64, sigma0: f64, sigma_dot: Vec<f64>) -> Result<Self> {
        let m = Self {
            rho0,
            sigma0,
            sigma_dot,
            sigma_ddot: None,
        };
        m.validate_values()?;
        Ok(m)
    }

    pub fn with_sigma_ddot(mut self, sigma_ddot: Vec<f64>) -> Self {
        self.sigma_ddot = Some(sigma_ddot);
        self
    }

    /// `rho0 = 1`, `sigma0 = 0`, the regime where explicit controls exist.
    pub fn unit_background(sigma_dot: Vec<f64>) -> Self {
        Self {
            rho0: 1.0,
            sigma0: 0.0,
            sigma_dot,
            sigma_ddot: None,
        }
    }

    fn validate_values(&self) -> Result<()> {
        if !(self.rho0 > 0.0) {
            return Err(Error::Config(format!("rho0 must be positive, got {}", self.rho0)));
        }
        if !(self.sigma0 >= 0.0) {
            return Err(Error::Config(format!(
                "sigma0 must be non-negative, got {}",
                self.sigma0
            )));
        }
        Ok(())
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        self.validate_values()?;
        let nx = grid.nx();
        if self.sigma_dot.len() != nx {
            return Err(Error::GridMismatch(format!(
                "sigma_dot has {} samples, grid has {nx} nodes",
                self.sigma_dot.len()
            )));
        }
        if let Some(s) = &self.sigma_ddot {
            if s.len() != nx {
                return Err(Error::GridMismatch(format!(
                    "sigma_ddot has {} samples, grid has {nx} nodes",
                    s.len()
                )));
            }
        }
        Ok(())
    }

    pub fn is_unit_background(&self) -> bool {
        self.rho0 == 1.0 && self.sigma0 == 0.0
    }

    /// Constant background damping on every node.
    pub fn background_sigma(&self) -> Vec<f64> {
        vec![self.sigma0; self.sigma_dot.len()]
    }

    /// `sigma0 + eps sigma_dot + eps^2 sigma_ddot` on every node.
    pub fn total_sigma(&self, eps: f64) -> Vec<f64> {
        let mut s: Vec<f64> = self
            .sigma_dot
            .iter()
            .map(|&sd| self.sigma0 + eps * sd)
            .collect();
        if let Some(dd) = &self.sigma_ddot {
            for (si, &d) in s.iter_mut().zip(dd) {
                *si += eps * eps * d;
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_grid_counts() {
        let g = GridSpec::standard();
        assert_eq!(g.nx(), 501);
        assert_eq!(g.nt(), 25001);
        assert_eq!(g.mid_index(), 12500);
        assert!((g.t(g.mid_index()) - 5.0).abs() < 1e-12);
        assert!((g.x(g.nx() - 1) - 1.0).abs() < 1e-12);
        assert!((g.courant(1.0) - 0.1).abs() < 1e-12);
        g.check_cfl(1.0).unwrap();
    }

    #[test]
    fn rejects_off_grid_ratios() {
        assert!(GridSpec::new(-1.0, 1.0, 0.3, 0.01, 5.0).is_err());
        assert!(GridSpec::new(-1.0, 1.0, 0.01, 0.003, 5.0).is_err());
    }

    #[test]
    fn rejects_short_horizon() {
        let e = GridSpec::new(-1.0, 1.0, 0.01, 0.001, 2.5).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
    }

    #[test]
    fn cfl_violation() {
        let g = GridSpec::new(-1.0, 1.0, 0.01, 0.02, 5.0).unwrap();
        assert!(g.check_cfl(1.0).is_err());
        assert!(g.check_cfl(4.0).is_ok());
    }

    #[test]
    fn total_sigma_adds_orders() {
        let m = MediumSpec::new(1.0, 0.5, vec![1.0, 2.0])
            .unwrap()
            .with_sigma_ddot(vec![10.0, 20.0]);
        let s = m.total_sigma(0.1);
        assert!((s[0] - (0.5 + 0.1 + 0.1)).abs() < 1e-14);
        assert!((s[1] - (0.5 + 0.2 + 0.2)).abs() < 1e-14);
        assert!(MediumSpec::new(0.0, 0.0, vec![]).is_err());
        assert!(MediumSpec::new(1.0, -0.1, vec![]).is_err());
    }
}
