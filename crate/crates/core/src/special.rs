//! Gamma-function helpers.

use statrs::function::gamma as sg;

pub fn gamma(x: f64) -> f64 {
    sg::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    sg::ln_gamma(x)
}

/// Regularized lower incomplete gamma P(a, x), extended by P(a, 0) = 0 and P(a, inf) = 1.
pub fn lower_regularized(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        sg::gamma_lr(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn upper_regularized(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        sg::gamma_ur(a, x)
    }
}

/// Mass that the normalized subordination kernel with parameters (alpha, tau)
/// assigns to the lag interval [s1, s2], 0 <= s1 <= s2 <= inf.
///
/// With r = tau^2 / (4 s) the kernel becomes the Gamma(alpha) density, so the mass is a
/// difference of regularized incomplete gamma values. The upper form is used when both
/// arguments are large to avoid cancellation near 1.
pub fn kernel_mass(alpha: f64, tau: f64, s1: f64, s2: f64) -> f64 {
    if s2 <= s1 {
        return 0.0;
    }
    let q = tau * tau / 4.0;
    let x1 = if s1 <= 0.0 { f64::INFINITY } else { q / s1 };
    let x2 = if s2.is_infinite() { 0.0 } else { q / s2 };
    if x1.is_finite() && x1 - x2 <= 0.05 * x2 {
        // narrow range: the difference of two nearly equal incomplete gamma values would
        // cancel, so integrate the Gamma(alpha) density directly
        let width = q * (s2 - s1) / (s1 * s2);
        let lg = ln_gamma(alpha);
        let density = |x: f64| ((alpha - 1.0) * x.ln() - x - lg).exp();
        return crate::quad::kronrod21(density, 0.5 * (x1 + x2), 0.5 * width);
    }
    if x2 > 1.0 {
        upper_regularized(alpha, x2) - upper_regularized(alpha, x1)
    } else {
        lower_regularized(alpha, x1) - lower_regularized(alpha, x2)
    }
}
