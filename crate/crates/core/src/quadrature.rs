//! Composite rules on uniform samples.

use num_complex::Complex64;

/// Composite trapezoid rule over uniformly spaced samples.
pub fn trapezoid(values: &[Complex64], h: f64) -> Complex64 {
    match values.len() {
        0 | 1 => Complex64::new(0.0, 0.0),
        n => {
            let inner: Complex64 = values[1..n - 1].iter().sum();
            (inner + 0.5 * (values[0] + values[n - 1])) * h
        }
    }
}

pub fn trapezoid_real(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            (inner + 0.5 * (values[0] + values[n - 1])) * h
        }
    }
}

/// Trapezoid `L2` norm of a complex sample vector.
pub fn l2_norm(values: &[Complex64], h: f64) -> f64 {
    let sq: Vec<f64> = values.iter().map(|z| z.norm_sqr()).collect();
    trapezoid_real(&sq, h).sqrt()
}

/// Relative `L2` error `||approx - exact|| / ||exact||`; returns the absolute error when
/// `exact` vanishes.
pub fn relative_l2(approx: &[Complex64], exact: &[Complex64], h: f64) -> f64 {
    let diff: Vec<Complex64> = approx.iter().zip(exact).map(|(a, e)| a - e).collect();
    let num = l2_norm(&diff, h);
    let den = l2_norm(exact, h);
    if den > 0.0 {
        num / den
    } else {
        num
    }
}
