//! Analytic profiles and their smooth compactly supported extension beyond `[a, b]`.
//!
//! A profile carries its value and first three derivatives at any real point. The
//! time-reversal controls need `phi'`, `phi''`, `phi'''`, `psi`, `psi'`, `psi''` of the
//! extended targets at arbitrary arguments, so everything here stays closed-form.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Value and derivatives of orders 1 to 3.
pub type Jet = [Complex64; 4];

const ZERO_JET: Jet = [Complex64 { re: 0.0, im: 0.0 }; 4];

/// Default bump exponent parameter; `d = 2` gives a `C^3` extension.
pub const DEFAULT_EXTENSION_ORDER: u32 = 2;

/// Refinement factor of the cumulative-integral table relative to `dx`.
pub const INTEGRAL_REFINEMENT: f64 = 10.0;

type JetFn = dyn Fn(f64) -> Jet + Send + Sync;

/// Scalar function of one real variable with three analytic derivatives.
#[derive(Clone)]
pub struct AnalyticProfile {
    jet_fn: Arc<JetFn>,
    support: Option<(f64, f64)>,
}

impl fmt::Debug for AnalyticProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticProfile")
            .field("support", &self.support)
            .finish_non_exhaustive()
    }
}

impl AnalyticProfile {
    /// Wraps a jet function; outside `support` (when given) every evaluation is zero.
    pub fn new(
        jet_fn: impl Fn(f64) -> Jet + Send + Sync + 'static,
        support: Option<(f64, f64)>,
    ) -> Self {
        Self {
            jet_fn: Arc::new(jet_fn),
            support,
        }
    }

    pub fn zero() -> Self {
        Self::new(|_| ZERO_JET, None)
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(move |_| [c, ZERO_JET[0], ZERO_JET[0], ZERO_JET[0]], None)
    }

    /// `sin(w x)`.
    pub fn sin(w: f64) -> Self {
        Self::new(
            move |x| {
                let (s, c) = (w * x).sin_cos();
                [s, w * c, -w * w * s, -w * w * w * c].map(|v| Complex64::new(v, 0.0))
            },
            None,
        )
    }

    /// `cos(w x)`.
    pub fn cos(w: f64) -> Self {
        Self::new(
            move |x| {
                let (s, c) = (w * x).sin_cos();
                [c, -w * s, -w * w * c, w * w * w * s].map(|v| Complex64::new(v, 0.0))
            },
            None,
        )
    }

    /// `exp(i w x)`.
    pub fn exp_i(w: f64) -> Self {
        Self::new(
            move |x| {
                let e = Complex64::from_polar(1.0, w * x);
                let iw = Complex64::new(0.0, w);
                [e, iw * e, iw * iw * e, iw * iw * iw * e]
            },
            None,
        )
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    pub fn jet(&self, x: f64) -> Jet {
        match self.support {
            Some((lo, hi)) if x < lo || x > hi => ZERO_JET,
            _ => (self.jet_fn)(x),
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.jet(x)[0]
    }

    pub fn deriv1(&self, x: f64) -> Complex64 {
        self.jet(x)[1]
    }

    pub fn deriv2(&self, x: f64) -> Complex64 {
        self.jet(x)[2]
    }

    pub fn deriv3(&self, x: f64) -> Complex64 {
        self.jet(x)[3]
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let inner = self.clone();
        Self::new(move |x| inner.jet(x).map(|v| c * v), self.support)
    }

    /// `alpha self + beta other`.
    pub fn linear_combination(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Self {
        let (p, q) = (self.clone(), other.clone());
        let support = match (self.support, other.support) {
            (Some((a0, a1)), Some((b0, b1))) => Some((a0.min(b0), a1.max(b1))),
            _ => None,
        };
        Self::new(
            move |x| {
                let (u, v) = (p.jet(x), q.jet(x));
                std::array::from_fn(|k| alpha * u[k] + beta * v[k])
            },
            support,
        )
    }
}

/// `exp(1 - 1/(1 - s^(2d)))` and its first three derivatives in `s`, for `|s| < 1`.
fn bump_jet(s: f64, d: u32) -> [f64; 4] {
    let m = 2 * d as i32;
    let mf = m as f64;
    let r = s.powi(m);
    let den = 1.0 - r;
    if den <= 0.0 {
        return [0.0; 4];
    }
    let g = 1.0 - 1.0 / den;
    // exp underflows long before the negative powers of den overflow
    if g < -700.0 {
        return [0.0; 4];
    }
    let r1 = mf * s.powi(m - 1);
    let r2 = mf * (mf - 1.0) * s.powi(m - 2);
    let r3 = mf * (mf - 1.0) * (mf - 2.0) * s.powi(m - 3);
    let inv = 1.0 / den;
    let inv2 = inv * inv;
    let inv3 = inv2 * inv;
    let inv4 = inv3 * inv;
    let g1 = -r1 * inv2;
    let g2 = -r2 * inv2 - 2.0 * r1 * r1 * inv3;
    let g3 = -r3 * inv2 - 6.0 * r1 * r2 * inv3 - 6.0 * r1 * r1 * r1 * inv4;
    let e = g.exp();
    [
        e,
        e * g1,
        e * (g2 + g1 * g1),
        e * (g3 + 3.0 * g1 * g2 + g1 * g1 * g1),
    ]
}

/// Leibniz rule for the product of a complex jet and a real jet.
fn product_jet(u: &Jet, v: &[f64; 4]) -> Jet {
    [
        u[0] * v[0],
        u[1] * v[0] + u[0] * v[1],
        u[2] * v[0] + 2.0 * u[1] * v[1] + u[0] * v[2],
        u[3] * v[0] + 3.0 * u[2] * v[1] + 3.0 * u[1] * v[2] + u[0] * v[3],
    ]
}

/// Extends `phi` from `[a, b]` to a `C^(2d-1)` profile supported in `[a - 1, b + 1]`.
///
/// On `(a - 1, a)` and `(b, b + 1)` the profile is multiplied by
/// `exp(1 - 1/(1 - (x - e)^(2d)))` with `e` the nearer endpoint.
pub fn extend(phi: &AnalyticProfile, a: f64, b: f64, d: u32) -> Result<AnalyticProfile> {
    if d < 2 {
        return Err(Error::Precondition(format!(
            "extension order d must be at least 2 for C^3 controls, got {d}"
        )));
    }
    if !(b > a) {
        return Err(Error::Precondition(format!("need a < b, got [{a}, {b}]")));
    }
    let inner = phi.clone();
    Ok(AnalyticProfile::new(
        move |x| {
            if (a..=b).contains(&x) {
                inner.jet(x)
            } else if x > a - 1.0 && x < a {
                product_jet(&inner.jet(x), &bump_jet(x - a, d))
            } else if x > b && x < b + 1.0 {
                product_jet(&inner.jet(x), &bump_jet(x - b, d))
            } else {
                ZERO_JET
            }
        },
        Some((a - 1.0, b + 1.0)),
    ))
}

/// Running integral `Psi(x) = int_{lo}^{x} psi` of a compactly supported profile.
///
/// Built from a per-interval Simpson table on a uniform refinement grid; between
/// nodes it uses cubic Hermite interpolation with the exact integrand as slope.
#[derive(Debug, Clone)]
pub struct Antiderivative {
    profile: AnalyticProfile,
    lo: f64,
    h: f64,
    cumulative: Vec<Complex64>,
}

impl Antiderivative {
    pub fn new(psi_ext: &AnalyticProfile, spacing: f64) -> Result<Self> {
        let (lo, hi) = psi_ext.support().ok_or_else(|| {
            Error::Precondition("antiderivative needs a compactly supported profile".into())
        })?;
        if !(spacing > 0.0) {
            return Err(Error::Precondition(format!(
                "refinement spacing must be positive, got {spacing}"
            )));
        }
        let n = ((hi - lo) / spacing).ceil().max(1.0) as usize;
        let h = (hi - lo) / n as f64;
        let mut cumulative = Vec::with_capacity(n + 1);
        let mut acc = Complex64::new(0.0, 0.0);
        cumulative.push(acc);
        let mut left = psi_ext.eval(lo);
        for i in 0..n {
            let x0 = lo + i as f64 * h;
            let right = psi_ext.eval(x0 + h);
            let mid = psi_ext.eval(x0 + 0.5 * h);
            acc += (left + 4.0 * mid + right) * (h / 6.0);
            cumulative.push(acc);
            left = right;
        }
        Ok(Self {
            profile: psi_ext.clone(),
            lo,
            h,
            cumulative,
        })
    }

    pub fn total(&self) -> Complex64 {
        *self.cumulative.last().expect("table is never empty")
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let n = self.cumulative.len() - 1;
        let hi = self.lo + n as f64 * self.h;
        if x <= self.lo {
            return Complex64::new(0.0, 0.0);
        }
        if x >= hi {
            return self.total();
        }
        let pos = (x - self.lo) / self.h;
        let i = (pos.floor() as usize).min(n - 1);
        let s = pos - i as f64;
        let x0 = self.lo + i as f64 * self.h;
        let (y0, y1) = (self.cumulative[i], self.cumulative[i + 1]);
        let (m0, m1) = (self.profile.eval(x0), self.profile.eval(x0 + self.h));
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        y0 * h00 + m0 * (h10 * self.h) + y1 * h01 + m1 * (h11 * self.h)
    }
}

/// `int psi_ext` over its support by composite Simpson at the given spacing.
pub fn total_integral(psi_ext: &AnalyticProfile, spacing: f64) -> Result<Complex64> {
    Ok(Antiderivative::new(psi_ext, spacing)?.total())
}
