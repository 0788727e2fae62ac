//! wasm-bindgen entry points for the static demo page in `www/`.
//!
//! Every function returns a flat array of interleaved columns so the page can plot it
//! without any glue beyond the generated bindings.

use fracpoisson::funcspace::{Grid, TestFunction};
use fracpoisson::kernel::{window_frequency_range, MultiplierCache};
use fracpoisson::lacunary::{LacunarySpec, WindowPair};
use fracpoisson::poisson::PoissonParams;
use fracpoisson::quad::QuadConfig;
use fracpoisson::transform::{maximal_truncated, TransformOptions};
use wasm_bindgen::prelude::*;

fn js<E: std::fmt::Display>(e: E) -> JsError {
    JsError::new(&e.to_string())
}

fn multipliers(alternating: bool) -> impl Fn(i32) -> f64 {
    move |j| if alternating && j % 2 != 0 { -1.0 } else { 1.0 }
}

/// Pairs (s, s·K(s)) of the subordination kernel on a log grid around s = τ²/4.
#[wasm_bindgen]
pub fn kernel_curve(alpha: f64, tau: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let p = PoissonParams::new(alpha, tau).map_err(js)?;
    let points = points.clamp(2, 4000);
    let center = (tau * tau / 4.0).ln();
    let mut out = Vec::with_capacity(2 * points);
    for i in 0..points {
        let s = (center - 7.0 + 16.0 * i as f64 / (points - 1) as f64).exp();
        out.push(s);
        out.push(s * p.kernel(s));
    }
    Ok(out)
}

/// Pairs (ρ, |m_N(ρ)|) for the window (−M, M) of a^j, on the window's frequency range.
#[wasm_bindgen]
pub fn multiplier_modulus(alpha: f64, base: f64, m: i32, alternating: bool) -> Result<Vec<f64>, JsError> {
    if !(1..=12).contains(&m) {
        return Err(JsError::new("M must lie in 1..=12"));
    }
    let spec = LacunarySpec::geometric(base, -m - 1, m + 2, multipliers(alternating)).map_err(js)?;
    let window = WindowPair::symmetric(m).map_err(js)?;
    let (lo, hi) = window_frequency_range(&spec, window).map_err(js)?;
    let du = MultiplierCache::aligned_step(base, 40);
    let mut cache = MultiplierCache::new(alpha, du, QuadConfig::default()).map_err(js)?;
    let sweep = cache.sweep(&spec, window, lo, hi).map_err(js)?;
    Ok(sweep
        .freqs
        .iter()
        .zip(&sweep.values)
        .flat_map(|(f, v)| [*f, v.norm()])
        .collect())
}

fn named_function(name: &str) -> Result<TestFunction, JsError> {
    let f = match name {
        "indicator" => TestFunction::Indicator { lo: 0.0, hi: 1.0 },
        "bump" => TestFunction::SmoothBump { center: 0.5, halfwidth: 1.0 },
        "shells" => TestFunction::AlternatingShellsUnit { a: 3.0 },
        other => return Err(JsError::new(&format!("unknown function {other}"))),
    };
    Ok(f)
}

/// Rows (t, f(t), T*_M f(t), T_{(−M,M)} f(t)) on [lo, hi] with the given step.
#[wasm_bindgen]
pub fn tstar_field(
    function: &str,
    alpha: f64,
    base: f64,
    m: i32,
    alternating: bool,
    lo: f64,
    hi: f64,
    step: f64,
) -> Result<Vec<f64>, JsError> {
    if !(1..=16).contains(&m) {
        return Err(JsError::new("M must lie in 1..=16"));
    }
    let f = named_function(function)?;
    let grid = Grid::from_range(lo, hi, step).map_err(js)?;
    if grid.count() > 2000 {
        return Err(JsError::new("at most 2000 grid points"));
    }
    let spec = LacunarySpec::geometric(base, -m, m + 1, multipliers(alternating)).map_err(js)?;
    let field = maximal_truncated(&f, &spec, alpha, m, &grid, &TransformOptions::default()).map_err(js)?;
    let mut out = Vec::with_capacity(4 * grid.count());
    for i in 0..grid.count() {
        let t = grid.point(i);
        out.extend([t, f.eval(t), field.tstar[i], field.full[i]]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_curve_is_interleaved_and_positive() {
        let c = kernel_curve(0.5, 1.0, 50).unwrap();
        assert_eq!(c.len(), 100);
        assert!(c.chunks(2).all(|p| p[0] > 0.0 && p[1] >= 0.0));
        assert!(c.chunks(2).any(|p| p[1] > 0.1));
    }

    #[test]
    fn multiplier_is_bounded() {
        let c = multiplier_modulus(0.5, 2.0, 3, true).unwrap();
        assert!(!c.is_empty());
        assert!(c.chunks(2).all(|p| p[1].is_finite() && p[1] < 10.0));
    }

    #[test]
    fn field_rows_dominate() {
        let rows = tstar_field("bump", 0.5, 2.0, 4, true, -1.0, 2.0, 0.25).unwrap();
        assert_eq!(rows.len() % 4, 0);
        assert!(rows.chunks(4).all(|r| r[2] + 1e-12 >= r[3].abs()));
    }
}
