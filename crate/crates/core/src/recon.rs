//! Fourier reconstruction of the damping perturbation from boundary measurements.
//!
//! For each wavenumber `k pi / 2` the controls steering the background wave to
//! `sin(k pi x / 2)` and `cos(k pi x / 2)` are built, the linearized map is measured on
//! their time derivatives, and the boundary identity gives
//! `S_ff = int sigma_dot sin^2`, `S_hh = int sigma_dot cos^2`, `S_fh = int sigma_dot sin cos`.
//! Their combinations are the Fourier coefficients of `sigma_dot` on `[-1, 1]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::control::{build_control, ControlBundle};
use crate::error::{Error, Result};
use crate::extension::{AnalyticProfile, DEFAULT_EXTENSION_ORDER};
use crate::grid::{GridSpec, MediumSpec};
use crate::identity::{linearized_rhs, PairData};
use crate::quadrature::l2_norm;
use crate::solver::{linearized_nd_map, solve, SolveOutput};
use crate::trace::BoundaryTrace;

/// How the linearized measurements are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataMode {
    /// Coupled background/perturbation solves.
    Linearized,
    /// `Lambda_sigma g - Lambda_sigma0 g` with `sigma = sigma0 + eps sigma_dot + eps^2 sigma_ddot`.
    NonlinearDifference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconSettings {
    /// Number of sine/cosine pairs.
    pub n_modes: usize,
    pub grid: GridSpec,
    /// Relative noise level of the measurements.
    pub noise_eps: f64,
    pub seed: u64,
    pub data_mode: DataMode,
    /// Perturbation size `eps` of the nonlinear-difference data.
    pub eps_linearization: f64,
    /// Extension order of the control targets.
    pub d: u32,
}

impl Default for ReconSettings {
    fn default() -> Self {
        Self {
            n_modes: 10,
            grid: GridSpec::standard(),
            noise_eps: 0.0,
            seed: 0,
            data_mode: DataMode::Linearized,
            eps_linearization: 1e-3,
            d: DEFAULT_EXTENSION_ORDER,
        }
    }
}

impl ReconSettings {
    pub fn validate(&self) -> Result<()> {
        if self.n_modes == 0 {
            return Err(Error::Config("number of modes must be at least 1".into()));
        }
        if !(self.noise_eps >= 0.0 && self.noise_eps.is_finite()) {
            return Err(Error::Config(format!("noise level must be >= 0, got {}", self.noise_eps)));
        }
        if self.data_mode == DataMode::NonlinearDifference && !(self.eps_linearization > 0.0) {
            return Err(Error::Config(format!(
                "nonlinear-difference data need eps > 0, got {}",
                self.eps_linearization
            )));
        }
        if self.d < 2 {
            return Err(Error::Config(format!("extension order must be >= 2, got {}", self.d)));
        }
        Ok(())
    }
}

/// Truncated Fourier series `a0 / 2 + sum_k a_k cos(k pi x) + b_k sin(k pi x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    pub a0: Complex64,
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

impl FourierCoeffs {
    pub fn zeros(n: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            a0: z,
            a: vec![z; n],
            b: vec![z; n],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.a.len()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            a0: self.a0 * c,
            a: self.a.iter().map(|z| z * c).collect(),
            b: self.b.iter().map(|z| z * c).collect(),
        }
    }

    /// `max |Im|` over all coefficients relative to `max |Re|`.
    pub fn imaginary_leakage(&self) -> f64 {
        let all = || std::iter::once(&self.a0).chain(&self.a).chain(&self.b);
        let im = all().map(|z| z.im.abs()).fold(0.0, f64::max);
        let re = all().map(|z| z.re.abs()).fold(0.0, f64::max);
        if re > 0.0 {
            im / re
        } else {
            im
        }
    }
}

/// Velocity targets of mode `k` and the matching parameter.
#[derive(Debug, Clone)]
pub struct ModeTargets {
    pub k: usize,
    /// `sin(k pi x / 2)`.
    pub p_f: AnalyticProfile,
    /// `cos(k pi x / 2)`.
    pub p_h: AnalyticProfile,
    /// `i k pi / 2`.
    pub lambda: Complex64,
}

pub fn fourier_targets(k: usize) -> Result<ModeTargets> {
    if k == 0 {
        return Err(Error::Precondition("mode index starts at 1".into()));
    }
    let w = k as f64 * PI / 2.0;
    Ok(ModeTargets {
        k,
        p_f: AnalyticProfile::sin(w),
        p_h: AnalyticProfile::cos(w),
        lambda: Complex64::new(0.0, w),
    })
}

/// Measured traces of one mode, used to key independent noise streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceRole {
    LamFT = 0,
    LamFTT = 1,
    LamHT = 2,
    LamHTT = 3,
    LamF = 4,
    LamH = 5,
}

/// Deterministic random stream for one `(seed, k, role)` triple.
pub fn noise_stream(seed: u64, k: usize, role: TraceRole) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(((k as u64) << 8) | role as u64);
    rng
}

/// Adds zero-mean Gaussian noise with standard deviation `eps * rms(trace)` to every sample.
///
/// Complex traces get independent real and imaginary parts of variance `(eps rms)^2 / 2`;
/// traces with no imaginary content stay real.
pub fn add_noise<R: Rng + ?Sized>(trace: &BoundaryTrace, eps: f64, rng: &mut R) -> BoundaryTrace {
    let rms = trace.rms();
    if eps == 0.0 || rms == 0.0 {
        return trace.clone();
    }
    let is_real = trace.endpoints().iter().all(|v| v.iter().all(|z| z.im == 0.0));
    let std = if is_real { eps * rms } else { eps * rms / 2f64.sqrt() };
    let normal = Normal::new(0.0, std).expect("finite positive standard deviation");
    let mut perturb = |v: &[Complex64]| -> Vec<Complex64> {
        v.iter()
            .map(|z| {
                let re = normal.sample(rng);
                let im = if is_real { 0.0 } else { normal.sample(rng) };
                z + Complex64::new(re, im)
            })
            .collect()
    };
    let a = perturb(trace.a());
    let b = perturb(trace.b());
    BoundaryTrace::new(a, b, trace.dt()).expect("same lengths as the input")
}

/// Which control of a mode enters a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    F,
    H,
}

/// Controls, measurements and background snapshots of one mode.
#[derive(Debug, Clone)]
pub struct ModeData {
    pub k: usize,
    pub lambda: Complex64,
    pub control_f: ControlBundle,
    pub control_h: ControlBundle,
    /// Measurements driven by `f_t`, `f_tt`, `h_t`, `h_tt`, indexed by role.
    pub measured: [BoundaryTrace; 4],
    /// Measurements driven by `f` and `h`, when requested.
    pub undifferentiated: Option<[BoundaryTrace; 2]>,
    /// Background `p0(T)` driven by `f` and `h`.
    pub p_f: Vec<Complex64>,
    pub p_h: Vec<Complex64>,
    pub t_half: f64,
}

impl ModeData {
    /// Copy with independent noise added to every measured trace.
    pub fn with_noise(&self, eps: f64, seed: u64) -> ModeData {
        let noisy = |t: &BoundaryTrace, role| add_noise(t, eps, &mut noise_stream(seed, self.k, role));
        let [ft, ftt, ht, htt] = &self.measured;
        let mut out = self.clone();
        out.measured = [
            noisy(ft, TraceRole::LamFT),
            noisy(ftt, TraceRole::LamFTT),
            noisy(ht, TraceRole::LamHT),
            noisy(htt, TraceRole::LamHTT),
        ];
        out.undifferentiated = self
            .undifferentiated
            .as_ref()
            .map(|[f, h]| [noisy(f, TraceRole::LamF), noisy(h, TraceRole::LamH)]);
        out
    }

    fn side(&self, s: Side) -> (&ControlBundle, &BoundaryTrace, &BoundaryTrace, &[Complex64], Option<&BoundaryTrace>) {
        let und = self.undifferentiated.as_ref();
        match s {
            Side::F => (&self.control_f, &self.measured[0], &self.measured[1], &self.p_f, und.map(|u| &u[0])),
            Side::H => (&self.control_h, &self.measured[2], &self.measured[3], &self.p_h, und.map(|u| &u[1])),
        }
    }

    /// Identity data for the ordered pair `(first, second)`.
    pub fn pair(&self, first: Side, second: Side) -> PairData {
        let (cf, lam_f_t, _, p_f, lam_f) = self.side(first);
        let (ch, lam_h_t, lam_h_tt, p_h, lam_h) = self.side(second);
        PairData {
            f: cf.f.clone(),
            f_t: cf.f_t.clone(),
            h: ch.f.clone(),
            h_t: ch.f_t.clone(),
            h_tt: ch.f_tt.clone(),
            lam_f_t: lam_f_t.clone(),
            lam_h_t: lam_h_t.clone(),
            lam_h_tt: lam_h_tt.clone(),
            lam_f: lam_f.cloned(),
            lam_h: lam_h.cloned(),
            lambda: self.lambda,
            p_f: p_f.to_vec(),
            p_h: p_h.to_vec(),
            t_half: self.t_half,
        }
    }
}

fn check_regime(medium: &MediumSpec, grid: &GridSpec) -> Result<()> {
    medium.validate(grid)?;
    if !medium.is_unit_background() {
        return Err(Error::UnsupportedRegime(format!(
            "reconstruction needs rho0 = 1 and sigma0 = 0, got rho0 = {}, sigma0 = {}",
            medium.rho0, medium.sigma0
        )));
    }
    Ok(())
}

/// One measurement: the data trace and the background solve for a Neumann input.
type MeasureFn<'a> = dyn Fn(&BoundaryTrace) -> Result<(BoundaryTrace, SolveOutput)> + 'a;

/// Runs the forward problems of mode `k` without noise.
///
/// `undifferentiated` additionally measures the map on `f` and `h` themselves.
pub fn acquire_clean_mode(
    k: usize,
    settings: &ReconSettings,
    medium: &MediumSpec,
    undifferentiated: bool,
) -> Result<ModeData> {
    settings.validate()?;
    let grid = &settings.grid;
    check_regime(medium, grid)?;
    let targets = fourier_targets(k)?;
    let cf = build_control(&targets.p_f, targets.lambda, grid, settings.d)?;
    let ch = build_control(&targets.p_h, targets.lambda, grid, settings.d)?;

    // background solves are returned alongside so that u0^{g_t}(T) = p0^g(T) comes for free
    let measure: Box<MeasureFn> = match settings.data_mode {
        DataMode::Linearized => Box::new(|g| {
            let out = linearized_nd_map(grid, medium, g)?;
            Ok((out.trace, out.background))
        }),
        DataMode::NonlinearDifference => {
            let full = medium.total_sigma(settings.eps_linearization);
            let background = medium.background_sigma();
            Box::new(move |g| {
                let perturbed = solve(grid, medium.rho0, &full, g, None)?;
                let base = solve(grid, medium.rho0, &background, g, None)?;
                Ok((perturbed.dirichlet.sub(&base.dirichlet)?, base))
            })
        }
    };

    let sqrt_rho = medium.rho0.sqrt();
    let (ft, bg_f) = measure(&cf.f_t)?;
    let (ftt, _) = measure(&cf.f_tt)?;
    let (ht, bg_h) = measure(&ch.f_t)?;
    let (htt, _) = measure(&ch.f_tt)?;
    let undifferentiated = if undifferentiated {
        Some([measure(&cf.f)?.0, measure(&ch.f)?.0])
    } else {
        None
    };
    log::debug!("mode {k} acquired");
    Ok(ModeData {
        k,
        lambda: targets.lambda,
        measured: [ft, ftt, ht, htt],
        undifferentiated,
        p_f: bg_f.u_snapshot.iter().map(|z| z * sqrt_rho).collect(),
        p_h: bg_h.u_snapshot.iter().map(|z| z * sqrt_rho).collect(),
        t_half: grid.t_half(),
        control_f: cf,
        control_h: ch,
    })
}

/// Mode data with the noise of `settings` applied.
pub fn acquire_pair_data(k: usize, settings: &ReconSettings, medium: &MediumSpec) -> Result<ModeData> {
    Ok(acquire_clean_mode(k, settings, medium, false)?.with_noise(settings.noise_eps, settings.seed))
}

/// Boundary-identity values of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeIdentities {
    pub s_ff: Complex64,
    pub s_hh: Complex64,
    pub s_fh: Complex64,
}

pub fn mode_identities(mode: &ModeData) -> Result<ModeIdentities> {
    Ok(ModeIdentities {
        s_ff: linearized_rhs(&mode.pair(Side::F, Side::F))?,
        s_hh: linearized_rhs(&mode.pair(Side::H, Side::H))?,
        s_fh: linearized_rhs(&mode.pair(Side::F, Side::H))?,
    })
}

/// `a_k = S_hh - S_ff`, `b_k = 2 S_fh`, `a0 = S_hh(1) + S_ff(1)`, all divided by `scale`.
pub fn assemble_coefficients(ids: &[ModeIdentities], n: usize, scale: f64) -> Result<FourierCoeffs> {
    if ids.len() < n || n == 0 {
        return Err(Error::Precondition(format!(
            "need identity values for modes 1..={n}, got {}",
            ids.len()
        )));
    }
    let inv = 1.0 / scale;
    Ok(FourierCoeffs {
        a0: (ids[0].s_hh + ids[0].s_ff) * inv,
        a: ids[..n].iter().map(|m| (m.s_hh - m.s_ff) * inv).collect(),
        b: ids[..n].iter().map(|m| 2.0 * m.s_fh * inv).collect(),
    })
}

/// Samples `a0 / 2 + sum_k a_k cos(k pi x) + b_k sin(k pi x)` on the grid.
pub fn synthesize(coeffs: &FourierCoeffs, grid: &GridSpec) -> Vec<Complex64> {
    grid.xs()
        .into_iter()
        .map(|x| {
            let mut s = coeffs.a0 / 2.0;
            for (j, (ak, bk)) in coeffs.a.iter().zip(&coeffs.b).enumerate() {
                let w = (j + 1) as f64 * PI * x;
                s += ak * w.cos() + bk * w.sin();
            }
            s
        })
        .collect()
}

/// Piecewise-constant perturbation: 2 on `[-1, -1/2]`, 3/2 on `(-1/2, 1/3)`, 1 on `[1/3, 1]`.
pub fn piecewise_truth(x: f64) -> f64 {
    if x <= -0.5 {
        2.0
    } else if x < 1.0 / 3.0 {
        1.5
    } else {
        1.0
    }
}

/// Closed-form Fourier coefficients `(a_k, b_k)` of [`piecewise_truth`].
pub fn piecewise_coefficients(k: usize) -> (f64, f64) {
    let kp = k as f64 * PI;
    let a = ((kp / 3.0).sin() - (kp / 2.0).sin()) / (2.0 * kp);
    let b = -((kp / 3.0).cos() + (kp / 2.0).cos() - 2.0 * kp.cos()) / (2.0 * kp);
    (a, b)
}

/// Orthogonal projection of [`piecewise_truth`] onto the first `n` Fourier modes.
pub fn projection_truth(n: usize, grid: &GridSpec) -> Vec<f64> {
    let coeffs: Vec<(f64, f64)> = (1..=n).map(piecewise_coefficients).collect();
    grid.sample(|x| {
        35.0 / 24.0
            + coeffs
                .iter()
                .enumerate()
                .map(|(j, (a, b))| {
                    let w = (j + 1) as f64 * PI * x;
                    a * w.cos() + b * w.sin()
                })
                .sum::<f64>()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconResult {
    pub coeffs: FourierCoeffs,
    pub sigma_recon: Vec<Complex64>,
    pub truth: Vec<f64>,
    /// `|Re(recon) - truth|_{L2} / |truth|_{L2}`.
    pub rel_l2: f64,
    /// `max |Re(recon) - truth|`.
    pub linf: f64,
    pub imaginary_leakage: f64,
}

/// Coefficients, synthesis and error metrics from already acquired (possibly noisy) modes.
pub fn reconstruct_from_modes(modes: &[ModeData], settings: &ReconSettings, truth: &[f64]) -> Result<ReconResult> {
    let grid = &settings.grid;
    if truth.len() != grid.nx() {
        return Err(Error::GridMismatch(format!(
            "truth has {} samples, grid has {} nodes",
            truth.len(),
            grid.nx()
        )));
    }
    let ids = modes.iter().map(mode_identities).collect::<Result<Vec<_>>>()?;
    let scale = match settings.data_mode {
        DataMode::Linearized => 1.0,
        DataMode::NonlinearDifference => settings.eps_linearization,
    };
    let coeffs = assemble_coefficients(&ids, settings.n_modes, scale)?;
    let sigma_recon = synthesize(&coeffs, grid);
    let err: Vec<Complex64> = sigma_recon.iter().zip(truth).map(|(r, t)| Complex64::new(r.re - t, 0.0)).collect();
    let truth_c: Vec<Complex64> = truth.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    let den = l2_norm(&truth_c, grid.dx());
    let num = l2_norm(&err, grid.dx());
    Ok(ReconResult {
        imaginary_leakage: coeffs.imaginary_leakage(),
        rel_l2: if den > 0.0 { num / den } else { num },
        linf: err.iter().map(|z| z.re.abs()).fold(0.0, f64::max),
        coeffs,
        sigma_recon,
        truth: truth.to_vec(),
    })
}

/// Noise-free measurements of modes `1..=n_modes`.
pub fn acquire_clean_modes(settings: &ReconSettings, medium: &MediumSpec) -> Result<Vec<ModeData>> {
    (1..=settings.n_modes)
        .map(|k| acquire_clean_mode(k, settings, medium, false))
        .collect()
}

/// Reconstruction from clean modes with the noise level and seed of `settings`.
pub fn reconstruct_with_noise(clean: &[ModeData], settings: &ReconSettings, truth: &[f64]) -> Result<ReconResult> {
    let noisy: Vec<ModeData> = clean
        .iter()
        .map(|m| m.with_noise(settings.noise_eps, settings.seed))
        .collect();
    reconstruct_from_modes(&noisy, settings, truth)
}

/// Full pipeline: controls, measurements, noise, identities, coefficients and synthesis.
pub fn reconstruct(settings: &ReconSettings, medium: &MediumSpec, truth: &[f64]) -> Result<ReconResult> {
    let clean = acquire_clean_modes(settings, medium)?;
    reconstruct_with_noise(&clean, settings, truth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn targets_of_mode_one() {
        let t = fourier_targets(1).unwrap();
        assert_eq!(t.lambda, c(0.0, PI / 2.0));
        assert!(fourier_targets(0).is_err());
        for k in 1..=10 {
            let t = fourier_targets(k).unwrap();
            assert_eq!(t.p_f.eval(0.0), c(0.0, 0.0));
            assert_eq!(t.p_h.eval(0.0), c(1.0, 0.0));
            for x in [-0.9, -0.2, 0.35, 1.0] {
                let s = t.p_f.eval(x).powi(2) + t.p_h.eval(x).powi(2);
                assert!((s - 1.0).norm() < 1e-14);
            }
        }
    }

    fn sample_trace(n: usize) -> BoundaryTrace {
        let a = (0..n).map(|j| c((j as f64 * 0.01).sin(), (j as f64 * 0.02).cos())).collect();
        let b = (0..n).map(|j| c((j as f64 * 0.03).cos(), 0.5)).collect();
        BoundaryTrace::new(a, b, 0.0004).unwrap()
    }

    #[test]
    fn zero_noise_is_identity() {
        let t = sample_trace(100);
        let mut rng = noise_stream(1, 1, TraceRole::LamFT);
        assert_eq!(add_noise(&t, 0.0, &mut rng), t);
        let z = BoundaryTrace::new(vec![c(0.0, 0.0); 10], vec![c(0.0, 0.0); 10], 0.1).unwrap();
        assert_eq!(add_noise(&z, 0.05, &mut rng), z);
    }

    #[test]
    fn noise_has_requested_level() {
        let t = sample_trace(25001);
        let noisy = add_noise(&t, 0.01, &mut noise_stream(7, 3, TraceRole::LamHT));
        let d = noisy.sub(&t).unwrap();
        let std = d.rms();
        assert!((std / (0.01 * t.rms()) - 1.0).abs() < 0.05, "{std}");
    }

    #[test]
    fn real_traces_stay_real() {
        let t = BoundaryTrace::new(vec![c(1.0, 0.0); 500], vec![c(-2.0, 0.0); 500], 0.1).unwrap();
        let n = add_noise(&t, 0.1, &mut noise_stream(0, 1, TraceRole::LamF));
        assert!(n.a().iter().chain(n.b()).all(|z| z.im == 0.0));
        assert_ne!(n, t);
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let t = sample_trace(200);
        let draw = |seed, k, role| add_noise(&t, 0.05, &mut noise_stream(seed, k, role));
        assert_eq!(draw(3, 2, TraceRole::LamFTT), draw(3, 2, TraceRole::LamFTT));
        assert_ne!(draw(3, 2, TraceRole::LamFTT), draw(3, 2, TraceRole::LamHTT));
        assert_ne!(draw(3, 2, TraceRole::LamFTT), draw(3, 3, TraceRole::LamFTT));
        assert_ne!(draw(3, 2, TraceRole::LamFTT), draw(4, 2, TraceRole::LamFTT));
    }

    #[test]
    fn zero_identities_give_zero_coefficients() {
        let z = c(0.0, 0.0);
        let ids = vec![ModeIdentities { s_ff: z, s_hh: z, s_fh: z }; 4];
        assert_eq!(assemble_coefficients(&ids, 4, 1.0).unwrap(), FourierCoeffs::zeros(4));
        assert!(assemble_coefficients(&ids, 5, 1.0).is_err());
    }

    #[test]
    fn coefficients_from_trig_identities() {
        let ids = vec![
            ModeIdentities { s_ff: c(1.0, 0.0), s_hh: c(3.0, 0.0), s_fh: c(0.25, 0.0) },
            ModeIdentities { s_ff: c(2.0, 0.0), s_hh: c(2.5, 0.0), s_fh: c(-1.0, 0.0) },
        ];
        let co = assemble_coefficients(&ids, 2, 0.5).unwrap();
        assert_eq!(co.a0, c(8.0, 0.0));
        assert_eq!(co.a, vec![c(4.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(co.b, vec![c(1.0, 0.0), c(-4.0, 0.0)]);
    }

    #[test]
    fn synthesis_examples() {
        let g = GridSpec::new(-1.0, 1.0, 0.01, 0.001, 5.0).unwrap();
        assert!(synthesize(&FourierCoeffs::zeros(3), &g).iter().all(|z| z.norm() == 0.0));
        let mut co = FourierCoeffs::zeros(4);
        co.a0 = c(8.0, 0.0);
        co.a[0] = c(1.0, 0.0);
        co.b[3] = c(0.0, 2.0);
        let s = synthesize(&co, &g);
        for (x, v) in g.xs().iter().zip(&s) {
            let expected = c(4.0 + (PI * x).cos(), 2.0 * (4.0 * PI * x).sin());
            assert!((v - expected).norm() < 1e-12);
        }
        let doubled = synthesize(&co.scale(2.0), &g);
        assert!(doubled.iter().zip(&s).all(|(d, v)| (d - 2.0 * v).norm() < 1e-12));
    }

    #[test]
    fn projection_truth_mean_and_convergence() {
        let g = GridSpec::new(-1.0, 1.0, 0.002, 0.0002, 5.0).unwrap();
        let p = projection_truth(10, &g);
        let mean = crate::quadrature::trapezoid_real(&p, g.dx()) / 2.0;
        assert!((mean - 35.0 / 24.0).abs() < 1e-3, "{mean}");

        let fine = projection_truth(2000, &g);
        for (x, level) in [(-0.8, 2.0), (-0.1, 1.5), (0.7, 1.0)] {
            let i = ((x - g.a()) / g.dx()).round() as usize;
            assert!((fine[i] - level).abs() < 5e-3, "{x}: {}", fine[i]);
        }
    }

    #[test]
    fn projection_coefficients_match_numerical_projection() {
        let g = GridSpec::new(-1.0, 1.0, 1.0 / 6000.0, 1.0 / 60000.0, 5.0).unwrap();
        let truth = g.sample(piecewise_truth);
        for k in 1..=10 {
            let w = k as f64 * PI;
            let cos_int: Vec<f64> = g.xs().iter().zip(&truth).map(|(x, s)| s * (w * x).cos()).collect();
            let sin_int: Vec<f64> = g.xs().iter().zip(&truth).map(|(x, s)| s * (w * x).sin()).collect();
            let (a, b) = piecewise_coefficients(k);
            // jumps on grid nodes make the trapezoid rule first order in dx
            assert!((crate::quadrature::trapezoid_real(&cos_int, g.dx()) - a).abs() < 1e-3);
            assert!((crate::quadrature::trapezoid_real(&sin_int, g.dx()) - b).abs() < 1e-3);
        }
    }

    #[test]
    fn settings_validation() {
        assert!(ReconSettings::default().validate().is_ok());
        let bad = [
            ReconSettings { n_modes: 0, ..Default::default() },
            ReconSettings { noise_eps: -0.1, ..Default::default() },
            ReconSettings { data_mode: DataMode::NonlinearDifference, eps_linearization: 0.0, ..Default::default() },
            ReconSettings { d: 1, ..Default::default() },
        ];
        for s in bad {
            assert!(matches!(s.validate(), Err(Error::Config(_))));
        }
    }

    #[test]
    fn damped_background_rejected() {
        let s = ReconSettings {
            grid: GridSpec::new(-1.0, 1.0, 0.02, 0.002, 5.0).unwrap(),
            n_modes: 1,
            ..Default::default()
        };
        let m = MediumSpec::new(1.0, 0.5, vec![0.0; s.grid.nx()]).unwrap();
        assert!(matches!(acquire_clean_mode(1, &s, &m, false), Err(Error::UnsupportedRegime(_))));
    }
}
