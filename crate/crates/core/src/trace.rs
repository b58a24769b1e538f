//! Boundary traces over `[0, 2T]` at the two endpoints and the algebra on them.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::quadrature::{trapezoid, trapezoid_real};

/// Complex time series at `x = a` and `x = b`, sample `j` at `t = j dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    values_a: Vec<Complex64>,
    values_b: Vec<Complex64>,
    dt: f64,
}

impl BoundaryTrace {
    pub fn new(values_a: Vec<Complex64>, values_b: Vec<Complex64>, dt: f64) -> Result<Self> {
        if values_a.len() != values_b.len() {
            return Err(Error::GridMismatch(format!(
                "endpoint series differ in length ({} vs {})",
                values_a.len(),
                values_b.len()
            )));
        }
        if !(dt > 0.0) {
            return Err(Error::Precondition(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            values_a,
            values_b,
            dt,
        })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); grid.nt()];
        Self {
            values_a: z.clone(),
            values_b: z,
            dt: grid.dt(),
        }
    }

    /// Samples `g(t, endpoint)` on the grid's time axis; `endpoint` is 0 at `a` and 1 at `b`.
    pub fn from_fn(grid: &GridSpec, g: impl Fn(f64, usize) -> Complex64) -> Self {
        let nt = grid.nt();
        let values_a = (0..nt).map(|j| g(grid.t(j), 0)).collect();
        let values_b = (0..nt).map(|j| g(grid.t(j), 1)).collect();
        Self {
            values_a,
            values_b,
            dt: grid.dt(),
        }
    }

    pub fn a(&self) -> &[Complex64] {
        &self.values_a
    }

    pub fn b(&self) -> &[Complex64] {
        &self.values_b
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_a.is_empty()
    }

    pub fn endpoints(&self) -> [&[Complex64]; 2] {
        [&self.values_a, &self.values_b]
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() || (self.dt - other.dt).abs() > 1e-12 * self.dt {
            return Err(Error::GridMismatch(format!(
                "traces differ: {} samples at dt = {} vs {} samples at dt = {}",
                self.len(),
                self.dt,
                other.len(),
                other.dt
            )));
        }
        Ok(())
    }

    pub fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if self.len() != grid.nt() || (self.dt - grid.dt()).abs() > 1e-12 * self.dt {
            return Err(Error::GridMismatch(format!(
                "trace has {} samples at dt = {}, grid expects {} at dt = {}",
                self.len(),
                self.dt,
                grid.nt(),
                grid.dt()
            )));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            values_a: self.values_a.iter().map(|&z| f(z)).collect(),
            values_b: self.values_b.iter().map(|&z| f(z)).collect(),
            dt: self.dt,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| c * z)
    }

    /// `alpha self + beta other`.
    pub fn combine(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
        self.check_same_grid(other)?;
        let mix = |x: &[Complex64], y: &[Complex64]| -> Vec<Complex64> {
            x.iter().zip(y).map(|(&p, &q)| alpha * p + beta * q).collect()
        };
        Ok(Self {
            values_a: mix(&self.values_a, &other.values_a),
            values_b: mix(&self.values_b, &other.values_b),
            dt: self.dt,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    /// Sample at time `j dt` on both endpoints.
    pub fn at(&self, j: usize) -> [Complex64; 2] {
        [self.values_a[j], self.values_b[j]]
    }

    /// Root-mean-square of all samples on both endpoints.
    pub fn rms(&self) -> f64 {
        let n = 2 * self.len();
        if n == 0 {
            return 0.0;
        }
        let ss: f64 = self
            .values_a
            .iter()
            .chain(&self.values_b)
            .map(|z| z.norm_sqr())
            .sum();
        (ss / n as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values_a
            .iter()
            .chain(&self.values_b)
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn index_of(&self, upto: f64) -> Result<usize> {
        let r = upto / self.dt;
        let n = r.round();
        if !(n >= 0.0) || (r - n).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::Precondition(format!(
                "integration limit {upto} is not a multiple of dt = {}",
                self.dt
            )));
        }
        let n = n as usize;
        if n >= self.len() {
            return Err(Error::Precondition(format!(
                "integration limit {upto} beyond the trace end {}",
                (self.len().saturating_sub(1)) as f64 * self.dt
            )));
        }
        Ok(n)
    }
}

/// Bilinear boundary pairing `int_0^upto [g1 g2](t, a) + [g1 g2](t, b) dt` by trapezoid.
///
/// No conjugation: complex traces are paired through complexification.
pub fn bilinear_time_boundary_pairing(
    g1: &BoundaryTrace,
    g2: &BoundaryTrace,
    upto: f64,
) -> Result<Complex64> {
    g1.check_same_grid(g2)?;
    let n = g1.index_of(upto)?;
    let mut total = Complex64::new(0.0, 0.0);
    for (x, y) in g1.endpoints().into_iter().zip(g2.endpoints()) {
        let prod: Vec<Complex64> = x[..=n].iter().zip(&y[..=n]).map(|(p, q)| p * q).collect();
        total += trapezoid(&prod, g1.dt);
    }
    Ok(total)
}

/// Time reversal `t -> 2T - t` as an exact index reversal.
pub fn reflect_trace(g: &BoundaryTrace) -> BoundaryTrace {
    let rev = |v: &[Complex64]| v.iter().rev().copied().collect::<Vec<_>>();
    BoundaryTrace {
        values_a: rev(&g.values_a),
        values_b: rev(&g.values_b),
        dt: g.dt,
    }
}

fn first_derivative(v: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = v.len();
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    if n < 3 {
        return d;
    }
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    d
}

fn second_derivative(v: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = v.len();
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    if n < 4 {
        return d;
    }
    let h2 = h * h;
    d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
    }
    d[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    d
}

/// Discrete `H^s((0, upto) x {a, b})` norm for `s` in `{0, 1, 2}`.
///
/// Time derivatives are taken on the whole trace with second-order differences
/// (one-sided at the ends) and then integrated over `[0, upto]` by trapezoid.
pub fn discrete_sobolev_norm(g: &BoundaryTrace, s: u32, upto: f64) -> Result<f64> {
    if s > 2 {
        return Err(Error::Precondition(format!("Sobolev order must be 0, 1 or 2, got {s}")));
    }
    let min_len = [1, 3, 4][s as usize];
    if g.len() < min_len {
        return Err(Error::Precondition(format!(
            "need at least {min_len} samples for order {s}, got {}",
            g.len()
        )));
    }
    let n = g.index_of(upto)?;
    let mut sq = 0.0;
    for v in g.endpoints() {
        let mut layers = vec![v.to_vec()];
        if s >= 1 {
            layers.push(first_derivative(v, g.dt));
        }
        if s >= 2 {
            layers.push(second_derivative(v, g.dt));
        }
        for layer in &layers {
            let m: Vec<f64> = layer[..=n].iter().map(|z| z.norm_sqr()).collect();
            sq += trapezoid_real(&m, g.dt);
        }
    }
    Ok(sq.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn grid() -> GridSpec {
        GridSpec::standard()
    }

    #[test]
    fn pairing_of_zero_is_zero() {
        let g = grid();
        let z = BoundaryTrace::zeros(&g);
        assert_eq!(bilinear_time_boundary_pairing(&z, &z, 5.0).unwrap(), c(0.0));
    }

    #[test]
    fn pairing_of_ones_counts_both_endpoints() {
        let g = grid();
        let one = BoundaryTrace::from_fn(&g, |_, _| c(1.0));
        let r = bilinear_time_boundary_pairing(&one, &one, 5.0).unwrap();
        assert!((r - c(10.0)).norm() < 1e-10);
    }

    #[test]
    fn pairing_linear_against_constant_on_one_endpoint() {
        let g = grid();
        let t = BoundaryTrace::from_fn(&g, |t, e| if e == 0 { c(t) } else { c(0.0) });
        let one = BoundaryTrace::from_fn(&g, |_, _| c(1.0));
        let r = bilinear_time_boundary_pairing(&t, &one, 5.0).unwrap();
        assert!((r - c(12.5)).norm() < 1e-9, "{r}");
    }

    #[test]
    fn pairing_does_not_conjugate() {
        let g = grid();
        let i = BoundaryTrace::from_fn(&g, |_, _| Complex64::new(0.0, 1.0));
        let r = bilinear_time_boundary_pairing(&i, &i, 1.0).unwrap();
        assert!((r - c(-2.0)).norm() < 1e-10);
    }

    #[test]
    fn pairing_errors() {
        let g = grid();
        let z = BoundaryTrace::zeros(&g);
        let short = BoundaryTrace::new(vec![c(0.0); 3], vec![c(0.0); 3], g.dt()).unwrap();
        assert!(matches!(
            bilinear_time_boundary_pairing(&z, &short, 0.0),
            Err(Error::GridMismatch(_))
        ));
        assert!(matches!(
            bilinear_time_boundary_pairing(&z, &z, 1.00005),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            bilinear_time_boundary_pairing(&z, &z, 11.0),
            Err(Error::Precondition(_))
        ));
        assert!(BoundaryTrace::new(vec![c(0.0); 3], vec![c(0.0); 2], 0.1).is_err());
    }

    /// Trapezoid error for `int_0^T sin^2 = T/2 - sin(2T)/4` falls by about 4 per halving.
    #[test]
    fn pairing_converges_at_second_order() {
        let exact = 5.0 / 2.0 - (10.0f64).sin() / 4.0;
        let mut errs = Vec::new();
        for dt in [0.05, 0.025, 0.0125] {
            let g = GridSpec::new(-1.0, 1.0, 0.05, dt, 5.0).unwrap();
            let s = BoundaryTrace::from_fn(&g, |t, e| if e == 0 { c(t.sin()) } else { c(0.0) });
            let r = bilinear_time_boundary_pairing(&s, &s, 5.0).unwrap();
            errs.push((r.re - exact).abs());
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
        }
    }

    #[test]
    fn reflect_examples() {
        let g = grid();
        let k = BoundaryTrace::from_fn(&g, |_, _| c(3.0));
        assert_eq!(reflect_trace(&k), k);
        let t = BoundaryTrace::from_fn(&g, |t, _| c(t));
        let r = reflect_trace(&t);
        assert!((r.a()[0] - c(10.0)).norm() < 1e-12);
        assert!((r.b()[g.mid_index()] - c(5.0)).norm() < 1e-12);
        assert_eq!(reflect_trace(&r), t);
    }

    #[test]
    fn sobolev_examples() {
        let g = grid();
        let z = BoundaryTrace::zeros(&g);
        assert_eq!(discrete_sobolev_norm(&z, 2, 5.0).unwrap(), 0.0);

        let k = BoundaryTrace::from_fn(&g, |_, _| c(2.0));
        let n0 = discrete_sobolev_norm(&k, 0, 5.0).unwrap();
        assert!((n0 - 2.0 * 10f64.sqrt()).abs() < 1e-10);

        let s = BoundaryTrace::from_fn(&g, |t, e| if e == 0 { c(t.sin()) } else { c(0.0) });
        let n1 = discrete_sobolev_norm(&s, 1, 5.0).unwrap();
        assert!((n1 - 5f64.sqrt()).abs() < 1e-6, "{n1}");

        // H^2 adds int sin^2 again
        let n2 = discrete_sobolev_norm(&s, 2, 5.0).unwrap();
        let exact2 = (5.0 + 5.0 / 2.0 - (10.0f64).sin() / 4.0f64).sqrt();
        assert!((n2 - exact2).abs() < 1e-6, "{n2} vs {exact2}");

        assert!(matches!(discrete_sobolev_norm(&s, 3, 5.0), Err(Error::Precondition(_))));
    }

    fn small_grid() -> GridSpec {
        GridSpec::new(-1.0, 1.0, 0.1, 0.1, 5.0).unwrap()
    }

    fn arb_trace() -> impl Strategy<Value = BoundaryTrace> {
        let n = small_grid().nt();
        (
            prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64), n),
            prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64), n),
        )
            .prop_map(|(a, b)| {
                let z = |v: Vec<(f64, f64)>| v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect();
                BoundaryTrace::new(z(a), z(b), small_grid().dt()).unwrap()
            })
    }

    proptest! {
        #[test]
        fn pairing_is_symmetric(g1 in arb_trace(), g2 in arb_trace()) {
            let p = bilinear_time_boundary_pairing(&g1, &g2, 5.0).unwrap();
            let q = bilinear_time_boundary_pairing(&g2, &g1, 5.0).unwrap();
            prop_assert_eq!(p, q);
        }

        #[test]
        fn pairing_is_bilinear(
            g1 in arb_trace(), g2 in arb_trace(), g3 in arb_trace(),
            ar in -3.0..3.0f64, ai in -3.0..3.0f64, br in -3.0..3.0f64,
        ) {
            let alpha = Complex64::new(ar, ai);
            let beta = Complex64::new(br, 0.5);
            let lhs = bilinear_time_boundary_pairing(&g1.combine(alpha, &g2, beta).unwrap(), &g3, 7.0).unwrap();
            let rhs = alpha * bilinear_time_boundary_pairing(&g1, &g3, 7.0).unwrap()
                + beta * bilinear_time_boundary_pairing(&g2, &g3, 7.0).unwrap();
            let bound = (alpha.norm() * g1.max_abs() + beta.norm() * g2.max_abs()) * g3.max_abs() * 14.0;
            prop_assert!((lhs - rhs).norm() <= 1e-13 * bound);
        }

        #[test]
        fn reflection_is_an_involution(g in arb_trace()) {
            prop_assert_eq!(reflect_trace(&reflect_trace(&g)), g);
        }
    }
}
