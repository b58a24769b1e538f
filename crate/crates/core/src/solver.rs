//! Leapfrog solver for `rho0 u_tt + sigma u_t - u_xx = S` on `[a, b]` with Neumann data
//! and zero initial state, plus the Neumann-to-Dirichlet maps built on it.
//!
//! The damping term is discretized symmetrically, `sigma (u^{n+1} - u^{n-1}) / (2 dt)`,
//! and the boundary flux enters through ghost nodes
//! `u_{-1} = u_1 + 2 dx g_a` and `u_{nx} = u_{nx-2} + 2 dx g_b`
//! (outward normal derivative `-u_x` at `a`, `u_x` at `b`).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, MediumSpec};
use crate::trace::BoundaryTrace;

/// Volume source `S(time_index, node_index)`.
pub type SourceFn<'a> = dyn Fn(usize, usize) -> Complex64 + Sync + 'a;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Boundary trace of `u`, and `u`, `p = sqrt(rho0) u_t`, `q = u_x` at `t = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutput {
    pub dirichlet: BoundaryTrace,
    pub u_snapshot: Vec<Complex64>,
    pub p_snapshot: Vec<Complex64>,
    pub q_snapshot: Vec<Complex64>,
}

/// Per-node update coefficients: `u^{n+1} = A u^n - B u^{n-1} + C (D2 u^n + S^n)`.
struct Scheme {
    nx: usize,
    dx: f64,
    dt: f64,
    rho0: f64,
    inv_dx2: f64,
    coef_a: Vec<f64>,
    coef_b: Vec<f64>,
    coef_c: Vec<f64>,
}

impl Scheme {
    fn new(grid: &GridSpec, rho0: f64, sigma: &[f64]) -> Result<Self> {
        grid.check_cfl(rho0)?;
        let nx = grid.nx();
        if sigma.len() != nx {
            return Err(Error::GridMismatch(format!(
                "damping has {} samples, grid has {nx} nodes",
                sigma.len()
            )));
        }
        let dt = grid.dt();
        let m = rho0 / (dt * dt);
        let mut coef_a = Vec::with_capacity(nx);
        let mut coef_b = Vec::with_capacity(nx);
        let mut coef_c = Vec::with_capacity(nx);
        for &s in sigma {
            let d = s / (2.0 * dt);
            let c = 1.0 / (m + d);
            coef_a.push(2.0 * m * c);
            coef_b.push((m - d) * c);
            coef_c.push(c);
        }
        Ok(Self {
            nx,
            dx: grid.dx(),
            dt,
            rho0,
            inv_dx2: 1.0 / (grid.dx() * grid.dx()),
            coef_a,
            coef_b,
            coef_c,
        })
    }

    /// Second-order start from zero data: `u^1 = dt^2 / (2 rho0) (D2 u^0 + S^0)`.
    ///
    /// Equals `u^1 = 0` whenever the flux and source vanish at `t = 0`.
    fn first_layer(&self, ga: Complex64, gb: Complex64, src: impl Fn(usize) -> Complex64, out: &mut [Complex64]) {
        let k = self.dt * self.dt / (2.0 * self.rho0);
        let n = self.nx;
        for (i, o) in out.iter_mut().enumerate() {
            *o = k * src(i);
        }
        out[0] += k * 2.0 * ga / self.dx;
        out[n - 1] += k * 2.0 * gb / self.dx;
    }

    #[inline]
    fn step(
        &self,
        prev: &[Complex64],
        curr: &[Complex64],
        next: &mut [Complex64],
        ga: Complex64,
        gb: Complex64,
        src: impl Fn(usize) -> Complex64,
    ) {
        let n = self.nx;
        assert!(prev.len() == n && curr.len() == n && next.len() == n && n >= 2);
        let (ca, cb, cc) = (&self.coef_a[..n], &self.coef_b[..n], &self.coef_c[..n]);
        let h2 = self.inv_dx2;

        let lap0 = (2.0 * (curr[1] - curr[0]) + 2.0 * self.dx * ga) * h2;
        next[0] = ca[0] * curr[0] - cb[0] * prev[0] + cc[0] * (lap0 + src(0));
        for i in 1..n - 1 {
            let lap = (curr[i + 1] + curr[i - 1] - 2.0 * curr[i]) * h2;
            next[i] = ca[i] * curr[i] - cb[i] * prev[i] + cc[i] * (lap + src(i));
        }
        let l = n - 1;
        let lap_end = (2.0 * (curr[l - 1] - curr[l]) + 2.0 * self.dx * gb) * h2;
        next[l] = ca[l] * curr[l] - cb[l] * prev[l] + cc[l] * (lap_end + src(l));
    }

    fn snapshot(
        &self,
        prev: &[Complex64],
        curr: &[Complex64],
        next: &[Complex64],
        ga: Complex64,
        gb: Complex64,
    ) -> [Vec<Complex64>; 3] {
        let n = self.nx;
        let sr = self.rho0.sqrt() / (2.0 * self.dt);
        let p = next.iter().zip(prev).map(|(u1, u0)| (u1 - u0) * sr).collect();
        let mut q = vec![ZERO; n];
        q[0] = -ga;
        for i in 1..n - 1 {
            q[i] = (curr[i + 1] - curr[i - 1]) / (2.0 * self.dx);
        }
        q[n - 1] = gb;
        [curr.to_vec(), p, q]
    }
}

/// Leapfrog state for one field.
struct Layers {
    prev: Vec<Complex64>,
    curr: Vec<Complex64>,
    next: Vec<Complex64>,
}

impl Layers {
    fn new(nx: usize) -> Self {
        Self {
            prev: vec![ZERO; nx],
            curr: vec![ZERO; nx],
            next: vec![ZERO; nx],
        }
    }

    fn rotate(&mut self) {
        std::mem::swap(&mut self.prev, &mut self.curr);
        std::mem::swap(&mut self.curr, &mut self.next);
    }
}

fn warn_if_active_at_start(neumann: &BoundaryTrace, source: Option<&SourceFn<'_>>, nx: usize) {
    let [ga, gb] = neumann.at(0);
    let scale = neumann.max_abs().max(1.0);
    if ga.norm().max(gb.norm()) > 1e-10 * scale {
        log::warn!("Neumann data does not vanish at t = 0; zero initial state is only approximate");
    }
    if let Some(s) = source {
        if (0..nx).any(|i| s(0, i).norm() > 1e-10) {
            log::warn!("source does not vanish at t = 0; zero initial state is only approximate");
        }
    }
}

/// Solves the damped wave equation with Neumann data `neumann` and optional source.
pub fn solve(
    grid: &GridSpec,
    rho0: f64,
    sigma: &[f64],
    neumann: &BoundaryTrace,
    source: Option<&SourceFn<'_>>,
) -> Result<SolveOutput> {
    let scheme = Scheme::new(grid, rho0, sigma)?;
    neumann.check_grid(grid)?;
    warn_if_active_at_start(neumann, source, scheme.nx);

    let (nx, nt, mid) = (grid.nx(), grid.nt(), grid.mid_index());
    let (ga, gb) = (neumann.a(), neumann.b());
    let mut da = Vec::with_capacity(nt);
    let mut db = Vec::with_capacity(nt);
    let mut u = Layers::new(nx);

    match source {
        Some(s) => scheme.first_layer(ga[0], gb[0], |i| s(0, i), &mut u.curr),
        None => scheme.first_layer(ga[0], gb[0], |_| ZERO, &mut u.curr),
    }
    da.extend([ZERO, u.curr[0]]);
    db.extend([ZERO, u.curr[nx - 1]]);

    let mut snapshot = None;
    for n in 1..nt - 1 {
        match source {
            Some(s) => scheme.step(&u.prev, &u.curr, &mut u.next, ga[n], gb[n], |i| s(n, i)),
            None => scheme.step(&u.prev, &u.curr, &mut u.next, ga[n], gb[n], |_| ZERO),
        }
        if n == mid {
            snapshot = Some(scheme.snapshot(&u.prev, &u.curr, &u.next, ga[n], gb[n]));
        }
        da.push(u.next[0]);
        db.push(u.next[nx - 1]);
        u.rotate();
    }

    let [u_snapshot, p_snapshot, q_snapshot] = snapshot.expect("T lies strictly inside (0, 2T)");
    Ok(SolveOutput {
        dirichlet: BoundaryTrace::new(da, db, grid.dt())?,
        u_snapshot,
        p_snapshot,
        q_snapshot,
    })
}

/// Neumann-to-Dirichlet map `f -> u^f|_{x = a, b}` for damping `sigma`.
pub fn nd_map(grid: &GridSpec, rho0: f64, sigma: &[f64], f: &BoundaryTrace) -> Result<BoundaryTrace> {
    Ok(solve(grid, rho0, sigma, f, None)?.dirichlet)
}

/// Result of one coupled background/perturbation pass.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedOutput {
    /// Boundary values of the first-order perturbation, the linearized map applied to `f`.
    pub trace: BoundaryTrace,
    pub background: SolveOutput,
}

/// Linearized Neumann-to-Dirichlet map in direction `medium.sigma_dot`.
///
/// Steps the background `u0` (damping `sigma0`, Neumann data `f`) and the perturbation
/// `u_dot` (same operator, zero flux, source `-sigma_dot d_t u0`) together. The source at
/// step `n` uses `(u0^{n+1} - u0^{n-1}) / (2 dt)` from the freshly updated layer.
pub fn linearized_nd_map(grid: &GridSpec, medium: &MediumSpec, f: &BoundaryTrace) -> Result<LinearizedOutput> {
    medium.validate(grid)?;
    let background_sigma = medium.background_sigma();
    let scheme = Scheme::new(grid, medium.rho0, &background_sigma)?;
    f.check_grid(grid)?;
    warn_if_active_at_start(f, None, scheme.nx);

    let (nx, nt, mid) = (grid.nx(), grid.nt(), grid.mid_index());
    let (ga, gb) = (f.a(), f.b());
    let sd = &medium.sigma_dot;
    let inv_2dt = 1.0 / (2.0 * grid.dt());

    let mut u0 = Layers::new(nx);
    let mut ud = Layers::new(nx);
    let mut bg_a = Vec::with_capacity(nt);
    let mut bg_b = Vec::with_capacity(nt);
    let mut lin_a = Vec::with_capacity(nt);
    let mut lin_b = Vec::with_capacity(nt);

    scheme.first_layer(ga[0], gb[0], |_| ZERO, &mut u0.curr);
    // d_t u0 vanishes at t = 0, so the perturbation starts from rest
    bg_a.extend([ZERO, u0.curr[0]]);
    bg_b.extend([ZERO, u0.curr[nx - 1]]);
    lin_a.extend([ZERO, ZERO]);
    lin_b.extend([ZERO, ZERO]);

    let mut snapshot = None;
    for n in 1..nt - 1 {
        scheme.step(&u0.prev, &u0.curr, &mut u0.next, ga[n], gb[n], |_| ZERO);
        {
            let (bp, bn) = (&u0.prev[..nx], &u0.next[..nx]);
            scheme.step(&ud.prev, &ud.curr, &mut ud.next, ZERO, ZERO, |i| {
                -sd[i] * (bn[i] - bp[i]) * inv_2dt
            });
        }
        if n == mid {
            snapshot = Some(scheme.snapshot(&u0.prev, &u0.curr, &u0.next, ga[n], gb[n]));
        }
        bg_a.push(u0.next[0]);
        bg_b.push(u0.next[nx - 1]);
        lin_a.push(ud.next[0]);
        lin_b.push(ud.next[nx - 1]);
        u0.rotate();
        ud.rotate();
    }

    let [u_snapshot, p_snapshot, q_snapshot] = snapshot.expect("T lies strictly inside (0, 2T)");
    Ok(LinearizedOutput {
        trace: BoundaryTrace::new(lin_a, lin_b, grid.dt())?,
        background: SolveOutput {
            dirichlet: BoundaryTrace::new(bg_a, bg_b, grid.dt())?,
            u_snapshot,
            p_snapshot,
            q_snapshot,
        },
    })
}

/// Discrete energy `1/2 int rho0 |u_t|^2 + 1/2 int u_x u_x` at the half steps
/// `t_{n+1/2}`, `n = 0 .. nt - 2`, for the unforced problem with Neumann data.
///
/// Kinetic part uses trapezoid node weights and `(u^{n+1} - u^n) / dt`; the potential
/// part pairs the cell gradients of `u^n` and `u^{n+1}`, the quantity the leapfrog
/// scheme conserves when `sigma = 0` and the flux vanishes.
pub fn energy_history(
    grid: &GridSpec,
    rho0: f64,
    sigma: &[f64],
    neumann: &BoundaryTrace,
) -> Result<Vec<f64>> {
    let scheme = Scheme::new(grid, rho0, sigma)?;
    neumann.check_grid(grid)?;
    let (nx, nt, dx, dt) = (grid.nx(), grid.nt(), grid.dx(), grid.dt());
    let (ga, gb) = (neumann.a(), neumann.b());
    let mut u = Layers::new(nx);
    scheme.first_layer(ga[0], gb[0], |_| ZERO, &mut u.curr);

    let energy = |lo: &[Complex64], hi: &[Complex64]| -> f64 {
        let mut kin = 0.0;
        for i in 0..nx {
            let w = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
            kin += w * ((hi[i] - lo[i]) / dt).norm_sqr();
        }
        let mut pot = 0.0;
        for i in 0..nx - 1 {
            let g0 = (lo[i + 1] - lo[i]) / dx;
            let g1 = (hi[i + 1] - hi[i]) / dx;
            pot += (g0 * g1.conj()).re;
        }
        0.5 * dx * (rho0 * kin + pot)
    };

    let mut out = Vec::with_capacity(nt - 1);
    out.push(energy(&u.prev, &u.curr));
    for n in 1..nt - 1 {
        scheme.step(&u.prev, &u.curr, &mut u.next, ga[n], gb[n], |_| ZERO);
        out.push(energy(&u.curr, &u.next));
        u.rotate();
    }
    Ok(out)
}
