//! Explicit Neumann controls by time reversal of a free-space D'Alembert solution.
//!
//! For a velocity target `psi = pT` and position target `phi = -(1/lambda) pT` (so that
//! `q(T) = -(1/lambda) pT'`), the free wave `w` with `w(T) = phi_ext + C_q` and
//! `w_t(T) = psi_ext` vanishes with its time derivative at `t = 0` inside `[a, b]`, and
//! its normal derivative on the boundary is the control.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::extension::{extend, AnalyticProfile, Antiderivative, INTEGRAL_REFINEMENT};
use crate::grid::{GridSpec, MediumSpec};
use crate::quadrature::relative_l2;
use crate::solver::solve;
use crate::trace::BoundaryTrace;

/// Control data for one target: the analytic traces `f`, `f_t`, `f_tt` on `[0, 2T]`
/// and everything needed to re-evaluate the underlying free wave.
#[derive(Debug, Clone)]
pub struct ControlBundle {
    pub lambda: Complex64,
    pub p_target: AnalyticProfile,
    pub phi_ext: AnalyticProfile,
    pub psi_ext: AnalyticProfile,
    /// `(1/2) int psi_ext`, the additive constant of the position target.
    pub c_q: Complex64,
    pub f: BoundaryTrace,
    pub f_t: BoundaryTrace,
    pub f_tt: BoundaryTrace,
    psi_integral: Antiderivative,
    t_half: f64,
}

/// Builds the control steering the unit-background wave to `p(T) = p_target`,
/// `q(T) = -(1/lambda) p_target'`.
pub fn build_control(
    p_target: &AnalyticProfile,
    lambda: Complex64,
    grid: &GridSpec,
    d: u32,
) -> Result<ControlBundle> {
    if lambda == Complex64::new(0.0, 0.0) {
        return Err(Error::Precondition("lambda must be nonzero".into()));
    }
    let (a, b, t_half) = (grid.a(), grid.b(), grid.t_half());
    let psi_ext = extend(p_target, a, b, d)?;
    let phi_ext = extend(&p_target.scaled(-1.0 / lambda), a, b, d)?;
    let psi_integral = Antiderivative::new(&psi_ext, grid.dx() / INTEGRAL_REFINEMENT)?;
    let c_q = 0.5 * psi_integral.total();

    // u = x + T - t, v = x - T + t; outward normal sign is -1 at a and +1 at b
    let traces: [Vec<[Complex64; 3]>; 2] = [(a, -1.0), (b, 1.0)].map(|(x, sign)| {
        (0..grid.nt())
            .map(|j| {
                let t = grid.t(j);
                let (pu, pv) = (phi_ext.jet(x + t_half - t), phi_ext.jet(x - t_half + t));
                let (su, sv) = (psi_ext.jet(x + t_half - t), psi_ext.jet(x - t_half + t));
                let h = 0.5 * sign;
                [
                    h * (pu[1] + pv[1] + sv[0] - su[0]),
                    h * (-pu[2] + pv[2] + sv[1] + su[1]),
                    h * (pu[3] + pv[3] + sv[2] - su[2]),
                ]
            })
            .collect()
    });
    let pick = |k: usize| -> Result<BoundaryTrace> {
        BoundaryTrace::new(
            traces[0].iter().map(|v| v[k]).collect(),
            traces[1].iter().map(|v| v[k]).collect(),
            grid.dt(),
        )
    };

    Ok(ControlBundle {
        lambda,
        p_target: p_target.clone(),
        f: pick(0)?,
        f_t: pick(1)?,
        f_tt: pick(2)?,
        phi_ext,
        psi_ext,
        c_q,
        psi_integral,
        t_half,
    })
}

impl ControlBundle {
    /// Free wave `w(t, x)`.
    pub fn field(&self, t: f64, x: f64) -> Complex64 {
        let (u, v) = (x + self.t_half - t, x - self.t_half + t);
        0.5 * (self.phi_ext.eval(u) + self.phi_ext.eval(v))
            - 0.5 * (self.psi_integral.eval(u) - self.psi_integral.eval(v))
            + self.c_q
    }

    /// `w_t(t, x)`.
    pub fn velocity(&self, t: f64, x: f64) -> Complex64 {
        let (u, v) = (x + self.t_half - t, x - self.t_half + t);
        0.5 * (self.phi_ext.deriv1(v) - self.phi_ext.deriv1(u))
            + 0.5 * (self.psi_ext.eval(u) + self.psi_ext.eval(v))
    }

    /// `q(T) = -(1/lambda) p_target'`.
    pub fn q_target(&self, x: f64) -> Complex64 {
        -self.p_target.deriv1(x) / self.lambda
    }
}

/// `w(t, x) = (1/2)[phi(x+T-t) + phi(x-T+t)] - (1/2) int_{x-T+t}^{x+T-t} psi + C_q`.
pub fn dalembert_field(bundle: &ControlBundle, t: f64, x: f64) -> Complex64 {
    bundle.field(t, x)
}

/// Fidelity of a control against the forward solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlReport {
    /// Relative `L2` error of `u_t(T)` against the velocity target.
    pub err_p: f64,
    /// Relative `L2` error of `u_x(T)` against `-(1/lambda) p_target'`.
    pub err_q: f64,
    /// Largest `|w(0, x)|`, `|w_t(0, x)|` over the grid nodes.
    pub err_init: f64,
}

/// Forward-solves the unit-background wave with the control and compares `p(T)`, `q(T)`.
pub fn verify_control(bundle: &ControlBundle, medium: &MediumSpec, grid: &GridSpec) -> Result<ControlReport> {
    if !medium.is_unit_background() {
        return Err(Error::UnsupportedRegime(format!(
            "explicit controls need rho0 = 1 and sigma0 = 0, got rho0 = {}, sigma0 = {}",
            medium.rho0, medium.sigma0
        )));
    }
    let out = solve(grid, 1.0, &vec![0.0; grid.nx()], &bundle.f, None)?;
    let xs = grid.xs();
    let p_exact: Vec<Complex64> = xs.iter().map(|&x| bundle.p_target.eval(x)).collect();
    let q_exact: Vec<Complex64> = xs.iter().map(|&x| bundle.q_target(x)).collect();
    let err_init = xs
        .iter()
        .map(|&x| bundle.field(0.0, x).norm().max(bundle.velocity(0.0, x).norm()))
        .fold(0.0, f64::max);
    Ok(ControlReport {
        err_p: relative_l2(&out.p_snapshot, &p_exact, grid.dx()),
        err_q: relative_l2(&out.q_snapshot, &q_exact, grid.dx()),
        err_init,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extension::DEFAULT_EXTENSION_ORDER as D;
    use std::f64::consts::PI;

    fn coarse() -> GridSpec {
        GridSpec::new(-1.0, 1.0, 0.01, 0.001, 5.0).unwrap()
    }

    fn i(x: f64) -> Complex64 {
        Complex64::new(0.0, x)
    }

    #[test]
    fn zero_target_gives_zero_control() {
        let g = coarse();
        let b = build_control(&AnalyticProfile::zero(), i(1.0), &g, D).unwrap();
        assert_eq!(b.c_q, Complex64::new(0.0, 0.0));
        for t in [&b.f, &b.f_t, &b.f_tt] {
            assert_eq!(t.max_abs(), 0.0);
        }
        let r = verify_control(&b, &MediumSpec::unit_background(vec![0.0; g.nx()]), &g).unwrap();
        assert_eq!((r.err_p, r.err_q, r.err_init), (0.0, 0.0, 0.0));
    }

    #[test]
    fn zero_lambda_rejected() {
        let e = build_control(&AnalyticProfile::sin(1.0), Complex64::new(0.0, 0.0), &coarse(), D);
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn plane_wave_position_target() {
        let k = 3.0;
        let b = build_control(&AnalyticProfile::exp_i(k), i(k), &coarse(), D).unwrap();
        for x in [-1.0, -0.3, 0.5, 1.0] {
            let expected = i(1.0 / k) * Complex64::from_polar(1.0, k * x);
            assert!((b.phi_ext.eval(x) - expected).norm() < 1e-14);
            // q(T) = grad phi = -exp(ikx)
            assert!((b.q_target(x) + Complex64::from_polar(1.0, k * x)).norm() < 1e-14);
            assert!((b.field(5.0, x) - expected - b.c_q).norm() < 1e-12);
        }
    }

    #[test]
    fn control_vanishes_before_support_reaches_boundary() {
        let g = coarse();
        let b = build_control(&AnalyticProfile::cos(PI), i(PI), &g, D).unwrap();
        let first = (2.0 / g.dt()).round() as usize;
        for tr in [&b.f, &b.f_t, &b.f_tt] {
            assert!(tr.a()[..first].iter().chain(&tr.b()[..first]).all(|z| z.norm() == 0.0));
        }
        assert!(b.f.max_abs() > 0.1);
        // nonzero on (T, 2T) as well: f(T, b) = phi'(b) + ...
        assert!(b.f.b()[g.mid_index() + 100].norm() > 0.0);
    }

    #[test]
    fn field_at_final_and_initial_times() {
        let g = coarse();
        let b = build_control(&AnalyticProfile::sin(PI / 2.0), i(PI / 2.0), &g, D).unwrap();
        for x in [-1.0, -0.41, 0.0, 0.77, 1.0] {
            assert!((b.field(5.0, x) - b.phi_ext.eval(x) - b.c_q).norm() < 1e-13);
            assert!(b.field(0.0, x).norm() < 1e-12);
            assert!(b.velocity(0.0, x).norm() < 1e-15);
        }
    }

    #[test]
    fn velocity_at_final_time_matches_finite_difference() {
        let g = coarse();
        let b = build_control(&AnalyticProfile::cos(1.5 * PI), i(1.5 * PI), &g, D).unwrap();
        let mut errs = Vec::new();
        for h in [1e-2, 5e-3] {
            let mut e: f64 = 0.0;
            for x in [-0.9, -0.2, 0.3, 0.95] {
                let fd = (b.field(5.0 + h, x) - b.field(5.0 - h, x)) / (2.0 * h);
                e = e.max((fd - b.psi_ext.eval(x)).norm());
                assert!((b.velocity(5.0, x) - b.psi_ext.eval(x)).norm() < 1e-14);
            }
            errs.push(e);
        }
        assert!(errs[0] < 1e-2, "{errs:?}");
        assert!((errs[0] / errs[1] - 4.0).abs() < 0.3, "{errs:?}");
    }

    #[test]
    fn derivative_traces_match_finite_differences() {
        let mut errs = Vec::new();
        for dt in [2e-3, 1e-3] {
            let g = GridSpec::new(-1.0, 1.0, 0.01, dt, 5.0).unwrap();
            let b = build_control(&AnalyticProfile::sin(2.0 * PI), i(2.0 * PI), &g, D).unwrap();
            let mut e: f64 = 0.0;
            for j in 1..g.nt() - 1 {
                for k in 0..2 {
                    let ft = (b.f.at(j + 1)[k] - b.f.at(j - 1)[k]) / (2.0 * dt);
                    let ftt = (b.f_t.at(j + 1)[k] - b.f_t.at(j - 1)[k]) / (2.0 * dt);
                    e = e.max((ft - b.f_t.at(j)[k]).norm() / b.f_t.max_abs());
                    e = e.max((ftt - b.f_tt.at(j)[k]).norm() / b.f_tt.max_abs());
                }
            }
            errs.push(e);
        }
        assert!(errs[0] < 1e-2, "{errs:?}");
        assert!(errs[0] / errs[1] > 3.5, "{errs:?}");
    }

    #[test]
    fn control_map_is_linear_in_target() {
        let g = coarse();
        let (p1, p2) = (AnalyticProfile::sin(PI), AnalyticProfile::cos(2.0 * PI));
        let (al, be) = (Complex64::new(2.0, -1.0), Complex64::new(0.5, 0.0));
        let lam = i(PI);
        let comb = build_control(&p1.linear_combination(al, &p2, be), lam, &g, D).unwrap();
        let b1 = build_control(&p1, lam, &g, D).unwrap();
        let b2 = build_control(&p2, lam, &g, D).unwrap();
        let scale = comb.f_tt.max_abs();
        for (c, (x, y)) in [(&comb.f, (&b1.f, &b2.f)), (&comb.f_tt, (&b1.f_tt, &b2.f_tt))] {
            let mix = x.combine(al, y, be).unwrap();
            assert!(c.sub(&mix).unwrap().max_abs() < 1e-12 * scale);
        }
        assert!((comb.c_q - (al * b1.c_q + be * b2.c_q)).norm() < 1e-12);
    }

    /// For real targets, flipping the sign of an imaginary `lambda` conjugates the control.
    #[test]
    fn conjugate_lambda_conjugates_control() {
        let g = coarse();
        let p = AnalyticProfile::cos(1.5 * PI);
        let plus = build_control(&p, i(1.5 * PI), &g, D).unwrap();
        let minus = build_control(&p, i(-1.5 * PI), &g, D).unwrap();
        for (x, y) in [(&plus.f, &minus.f), (&plus.f_t, &minus.f_t), (&plus.f_tt, &minus.f_tt)] {
            let diff = x.map(|z| z.conj()).sub(y).unwrap().max_abs();
            assert!(diff < 1e-13 * x.max_abs(), "{diff}");
        }
    }

    #[test]
    fn verify_rejects_damped_background() {
        let g = coarse();
        let b = build_control(&AnalyticProfile::sin(PI), i(PI), &g, D).unwrap();
        let m = MediumSpec::new(1.0, 0.1, vec![0.0; g.nx()]).unwrap();
        assert!(matches!(verify_control(&b, &m, &g), Err(Error::UnsupportedRegime(_))));
    }

    /// At Courant number 1 the leapfrog scheme is exact for the 1D wave equation, so the
    /// forward solve reproduces the targets to rounding.
    #[test]
    fn control_is_exact_at_unit_courant_number() {
        let g = GridSpec::new(-1.0, 1.0, 0.01, 0.01, 5.0).unwrap();
        let m = MediumSpec::unit_background(vec![0.0; g.nx()]);
        for k in [1.0, 4.0, 7.0] {
            let w = k * PI / 2.0;
            for p in [AnalyticProfile::sin(w), AnalyticProfile::cos(w)] {
                let r = verify_control(&build_control(&p, i(w), &g, D).unwrap(), &m, &g).unwrap();
                assert!(r.err_p < 1e-10 && r.err_q < 1e-10, "{r:?}");
            }
        }
    }

    #[test]
    fn sine_control_reaches_target_on_standard_grid() {
        let g = GridSpec::standard();
        let m = MediumSpec::unit_background(vec![0.0; g.nx()]);
        let b = build_control(&AnalyticProfile::sin(PI / 2.0), i(PI / 2.0), &g, D).unwrap();
        let r = verify_control(&b, &m, &g).unwrap();
        assert!(r.err_p <= 1e-2, "{r:?}");
        assert!(r.err_init <= 1e-10, "{r:?}");
    }

    #[test]
    fn control_error_is_second_order() {
        let g = GridSpec::new(-1.0, 1.0, 0.008, 0.0008, 5.0).unwrap();
        let errs: Vec<f64> = [g, g.refined(), g.refined().refined()]
            .iter()
            .map(|g| {
                let m = MediumSpec::unit_background(vec![0.0; g.nx()]);
                let b = build_control(&AnalyticProfile::cos(PI / 2.0), i(PI / 2.0), g, D).unwrap();
                verify_control(&b, &m, g).unwrap().err_p
            })
            .collect();
        let last = errs[1] / errs[2];
        assert!(errs[0] / errs[1] > 2.5 && (3.3..=4.6).contains(&last), "{errs:?}");
    }
}
