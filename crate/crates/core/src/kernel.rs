//! The convolution kernel of a windowed differential transform, its size bounds, the
//! Fourier multiplier, and a numerical check of the contour identity
//!
//!   ∫_0^∞ e^{−z(u + 1/u)} u^{−α} du = z^{1−α} ∫_0^∞ e^{−r} e^{−z²/r} r^{α−2} dr,  |arg z| ≤ π/4.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use num_complex::Complex64;
use thiserror::Error;

use crate::lacunary::{window_indices, LacunaryError, LacunarySpec, WindowPair};
use crate::quad::{integrate_halfline, integrate_interval, integrate_positive, QuadConfig, QuadError};
use crate::special::gamma;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("the kernel lives on s > 0, got {0}")]
    NonPositiveLag(f64),
    #[error("z0 = {re} + {im}i is outside the sector |arg z| <= pi/4")]
    OutsideSector { re: f64, im: f64 },
    #[error("invalid frequency grid")]
    InvalidGrid,
    #[error(transparent)]
    Lacunary(#[from] LacunaryError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

fn check_alpha(alpha: f64) -> Result<(), KernelError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(KernelError::InvalidAlpha(alpha))
    }
}

#[derive(Debug, Clone, Copy)]
struct Layer {
    /// v_{k−1} − v_k
    coef: f64,
    /// α ln a_k²
    log_scale: f64,
    a2: f64,
}

/// K_N(s) = (1/(4^α Γ(α))) Σ_{j=N1}^{N2} v_j (L_{j+1}(s) − L_j(s)),
/// L_j(s) = a_j^{2α} e^{−a_j²/(4s)} s^{−1−α}.
///
/// Stored after summation by parts as Σ_{k=N1}^{N2+1} (v_{k−1} − v_k) L_k with
/// v_{N1−1} = v_{N2+1} = 0, so each layer appears once.
#[derive(Debug, Clone)]
pub struct KernelEval {
    alpha: f64,
    norm: f64,
    window: WindowPair,
    layers: Vec<Layer>,
}

impl KernelEval {
    pub fn new(spec: &LacunarySpec, window: WindowPair, alpha: f64) -> Result<Self, KernelError> {
        check_alpha(alpha)?;
        window_indices(spec, window)?;
        let v = |k: i32| {
            if k < window.n1() || k > window.n2() {
                0.0
            } else {
                spec.v(k)
            }
        };
        let mut layers = Vec::new();
        for k in window.n1()..=window.n2() + 1 {
            let c = v(k - 1) - v(k);
            if c == 0.0 {
                continue;
            }
            let a2 = spec.a(k) * spec.a(k);
            layers.push(Layer {
                coef: c,
                log_scale: alpha * a2.ln(),
                a2,
            });
        }
        Ok(KernelEval {
            alpha,
            norm: 4f64.powf(alpha) * gamma(alpha),
            window,
            layers,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn window(&self) -> WindowPair {
        self.window
    }

    /// Signed layer terms at s, largest magnitude first.
    fn terms(&self, s: f64, with_derivative: bool) -> Vec<f64> {
        let ls = s.ln();
        let mut t: Vec<f64> = self
            .layers
            .iter()
            .map(|l| {
                let e = l.log_scale - l.a2 / (4.0 * s) - (1.0 + self.alpha) * ls;
                let mut x = l.coef * e.exp();
                if with_derivative {
                    x *= l.a2 / (4.0 * s * s) - (1.0 + self.alpha) / s;
                }
                x
            })
            .collect();
        t.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
        t
    }

    /// K_N(s) for s > 0; summed largest to smallest.
    pub fn value_at(&self, s: f64) -> f64 {
        self.terms(s, false).iter().sum::<f64>() / self.norm
    }

    /// ∂_s K_N(s) for s > 0.
    pub fn dvalue_at(&self, s: f64) -> f64 {
        self.terms(s, true).iter().sum::<f64>() / self.norm
    }
}

pub fn kernel_value(ke: &KernelEval, s: f64) -> Result<f64, KernelError> {
    if !(s > 0.0) {
        return Err(KernelError::NonPositiveLag(s));
    }
    Ok(ke.value_at(s))
}

pub fn kernel_dvalue(ke: &KernelEval, s: f64) -> Result<f64, KernelError> {
    if !(s > 0.0) {
        return Err(KernelError::NonPositiveLag(s));
    }
    Ok(ke.dvalue_at(s))
}

/// Log-spaced points from lo to hi inclusive.
pub fn geometric_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && per_decade > 0);
    let n = ((hi / lo).log10() * per_decade as f64).ceil().max(1.0) as usize;
    let (ll, lh) = (lo.ln(), hi.ln());
    (0..=n).map(|i| (ll + (lh - ll) * i as f64 / n as f64).exp()).collect()
}

/// [a_{N1}²·1e−3, a_{N2+1}²·1e3] at the given density.
pub fn default_lag_grid(spec: &LacunarySpec, window: WindowPair, per_decade: usize) -> Result<Vec<f64>, KernelError> {
    window_indices(spec, window)?;
    let lo = spec.a(window.n1()).powi(2) * 1e-3;
    let hi = spec.a(window.n2() + 1).powi(2) * 1e3;
    Ok(geometric_grid(lo, hi, per_decade))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSweep {
    /// sup s|K_N(s)|
    pub sup_s_k: f64,
    /// sup s²|∂_s K_N(s)|
    pub sup_s2_dk: f64,
}

pub fn bound_sweep(ke: &KernelEval, s_grid: &[f64]) -> BoundSweep {
    let mut out = BoundSweep {
        sup_s_k: 0.0,
        sup_s2_dk: 0.0,
    };
    for &s in s_grid {
        if s > 0.0 {
            out.sup_s_k = out.sup_s_k.max(s * ke.value_at(s).abs());
            out.sup_s2_dk = out.sup_s2_dk.max(s * s * ke.dvalue_at(s).abs());
        }
    }
    out
}

/// m(x) = (1/Γ(α)) ∫_0^∞ e^{−r} e^{−ix/(4r)} r^{α−1} dr, the Fourier multiplier of the
/// Poisson operator at τ with x = τ²·frequency.
///
/// For x > 0 the path is turned to r = e^{iπ/4}ρ, where the integrand is
/// e^{iαπ/4} exp(−e^{iπ/4}(ρ + x/(4ρ))) ρ^{α−1} and decays at both ends without
/// oscillating out of control. m(−x) is the conjugate of m(x).
pub fn multiplier_m(alpha: f64, x: f64, cfg: &QuadConfig) -> Result<Complex64, KernelError> {
    check_alpha(alpha)?;
    if x == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let y = x.abs();
    let rot = Complex64::from_polar(1.0, FRAC_PI_4);
    let saddle = y.sqrt() / 2.0;
    let c = cfg
        .clone()
        .with_split_points(vec![y / 4.0, 1.0])
        .with_pivot(saddle);
    let r = integrate_halfline(
        |rho: f64| (-rot * (rho + y / (4.0 * rho))).exp() * rho.powf(alpha - 1.0),
        &c,
    )?;
    let m = r.value * Complex64::from_polar(1.0 / gamma(alpha), alpha * FRAC_PI_4);
    Ok(if x < 0.0 { m.conj() } else { m })
}

/// m_N(ρ) = Σ_{j=N1}^{N2} v_j (m(a_{j+1}²ρ) − m(a_j²ρ)).
pub fn multiplier_tn(
    spec: &LacunarySpec,
    window: WindowPair,
    alpha: f64,
    freq: f64,
    cfg: &QuadConfig,
) -> Result<Complex64, KernelError> {
    let mut sum = Complex64::new(0.0, 0.0);
    for j in window_indices(spec, window)? {
        let hi = multiplier_m(alpha, spec.a(j + 1).powi(2) * freq, cfg)?;
        let lo = multiplier_m(alpha, spec.a(j).powi(2) * freq, cfg)?;
        sum += (hi - lo) * spec.v(j);
    }
    Ok(sum)
}

/// Memo of m on the lattice x_k = e^{k·du}.
///
/// With du = ln(a²)/n for a geometric sequence, a_j²·x_k = x_{k + jn}, so a frequency
/// sweep on the same lattice needs each m value once for all layers and windows.
#[derive(Debug, Clone)]
pub struct MultiplierCache {
    alpha: f64,
    du: f64,
    cfg: QuadConfig,
    values: BTreeMap<i64, Complex64>,
}

impl MultiplierCache {
    pub fn new(alpha: f64, du: f64, cfg: QuadConfig) -> Result<Self, KernelError> {
        check_alpha(alpha)?;
        if !(du > 0.0 && du.is_finite()) {
            return Err(KernelError::InvalidGrid);
        }
        Ok(MultiplierCache {
            alpha,
            du,
            cfg,
            values: BTreeMap::new(),
        })
    }

    /// Step in ln x aligned with ratio ρ: ln(ρ²)/n with n the nearest count to the
    /// requested density per decade.
    pub fn aligned_step(rho: f64, per_decade: usize) -> f64 {
        let l = 2.0 * rho.ln();
        let n = (l / std::f64::consts::LN_10 * per_decade as f64).round().max(1.0);
        l / n
    }

    pub fn du(&self) -> f64 {
        self.du
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Lattice offset of ln(a²) if it lies on the lattice.
    fn offset(&self, a: f64) -> Option<i64> {
        let q = 2.0 * a.ln() / self.du;
        let k = q.round();
        ((q - k).abs() < 1e-6).then_some(k as i64)
    }

    fn fill(&mut self, needed: Vec<i64>) -> Result<(), KernelError> {
        let missing: Vec<i64> = needed.into_iter().filter(|k| !self.values.contains_key(k)).collect();
        let (alpha, du, cfg) = (self.alpha, self.du, &self.cfg);
        let eval = |k: &i64| multiplier_m(alpha, (*k as f64 * du).exp(), cfg).map(|m| (*k, m));
        #[cfg(feature = "parallel")]
        let computed: Result<Vec<_>, _> = {
            use rayon::prelude::*;
            missing.par_iter().map(eval).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let computed: Result<Vec<_>, _> = missing.iter().map(eval).collect();
        self.values.extend(computed?);
        Ok(())
    }

    /// m_N on the lattice frequencies e^{k du} covering [lo, hi]. Layers that do not sit on
    /// the lattice are evaluated directly.
    pub fn sweep(
        &mut self,
        spec: &LacunarySpec,
        window: WindowPair,
        lo: f64,
        hi: f64,
    ) -> Result<FrequencySweep, KernelError> {
        if !(lo > 0.0 && hi > lo) {
            return Err(KernelError::InvalidGrid);
        }
        let range = window_indices(spec, window)?;
        let k_lo = (lo.ln() / self.du).floor() as i64;
        let k_hi = (hi.ln() / self.du).ceil() as i64;
        let layers: Vec<(i32, Option<i64>)> =
            (*range.start()..=*range.end() + 1).map(|j| (j, self.offset(spec.a(j)))).collect();
        let mut needed = Vec::new();
        for &(_, off) in &layers {
            if let Some(o) = off {
                needed.extend((k_lo..=k_hi).map(|k| k + o));
            }
        }
        needed.sort_unstable();
        needed.dedup();
        self.fill(needed)?;

        let mut freqs = Vec::with_capacity((k_hi - k_lo + 1) as usize);
        let mut values = Vec::with_capacity(freqs.capacity());
        for k in k_lo..=k_hi {
            let freq = (k as f64 * self.du).exp();
            let mut m_at = Vec::with_capacity(layers.len());
            for &(j, off) in &layers {
                m_at.push(match off {
                    Some(o) => self.values[&(k + o)],
                    None => multiplier_m(self.alpha, spec.a(j).powi(2) * freq, &self.cfg)?,
                });
            }
            let mut sum = Complex64::new(0.0, 0.0);
            for (i, j) in range.clone().enumerate() {
                sum += (m_at[i + 1] - m_at[i]) * spec.v(j);
            }
            freqs.push(freq);
            values.push(sum);
        }
        Ok(FrequencySweep { freqs, values })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySweep {
    pub freqs: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl FrequencySweep {
    /// (sup |m_N|, frequency where it is attained)
    pub fn sup(&self) -> (f64, f64) {
        self.freqs
            .iter()
            .zip(&self.values)
            .fold((0.0, f64::NAN), |acc, (&f, v)| if v.norm() > acc.0 { (v.norm(), f) } else { acc })
    }
}

/// Frequencies [1e−4/a_{N2+1}², 1e4/a_{N1}²]: m_N depends on ρ only through a_j²ρ, so
/// this covers every layer from well below to well above its transition.
pub fn window_frequency_range(spec: &LacunarySpec, window: WindowPair) -> Result<(f64, f64), KernelError> {
    window_indices(spec, window)?;
    Ok((1e-4 / spec.a(window.n2() + 1).powi(2), 1e4 / spec.a(window.n1()).powi(2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_diff: f64,
}

impl IdentityCheck {
    pub fn rel_diff(&self) -> f64 {
        self.abs_diff / self.lhs.norm().max(self.rhs.norm())
    }
}

/// Both sides of the contour identity by independent quadratures.
///
/// lhs is integrated directly. For rhs the variable w = 1/r gives
/// ∫_0^∞ e^{−1/w} w^{−α} e^{−z²w} dw. When |arg z| <= π/8 this converges absolutely and is
/// integrated as it stands. Otherwise [0, 1] stays on the real axis and the tail is moved
/// to the ray w = 1 + ξe^{iφ}, φ = −arg z², where e^{−z²w} decays without oscillation.
pub fn contour_identity_check(alpha: f64, z0: Complex64, cfg: &QuadConfig) -> Result<IdentityCheck, KernelError> {
    check_alpha(alpha)?;
    if !(z0.re > 0.0) || z0.arg().abs() > FRAC_PI_4 * (1.0 + 1e-12) {
        return Err(KernelError::OutsideSector { re: z0.re, im: z0.im });
    }
    let lhs = integrate_halfline(|u: f64| (-z0 * (u + 1.0 / u)).exp() * u.powf(-alpha), &cfg.clone().with_pivot(1.0))?.value;

    let lambda = z0 * z0;
    let h = |w: Complex64| (-w.inv() - alpha * w.ln()).exp();
    let scale = 1.0 / lambda.norm();
    let tail = if z0.arg().abs() <= FRAC_PI_8 {
        let c = cfg.clone().with_split_points(vec![scale]).with_pivot(1.0);
        integrate_halfline(|w: f64| h(Complex64::new(w, 0.0)) * (-lambda * w).exp(), &c)?.value
    } else {
        let w0 = 1.0;
        let head = integrate_interval(|w: f64| h(Complex64::new(w, 0.0)) * (-lambda * w).exp(), 0.0, w0, cfg)?.value;
        let dir = Complex64::from_polar(1.0, -lambda.arg());
        let c = cfg.clone().with_pivot(scale);
        let ray = integrate_halfline(
            |xi: f64| {
                let w = Complex64::new(w0, 0.0) + dir * xi;
                h(w) * (-lambda * w).exp()
            },
            &c,
        )?
        .value;
        head + dir * ray
    };
    let rhs = (z0.ln() * (1.0 - alpha)).exp() * tail;
    Ok(IdentityCheck {
        lhs,
        rhs,
        abs_diff: (lhs - rhs).norm(),
    })
}

/// ∫_0^∞ a^{2α} e^{−a²/(4s)} s^{−1−α} ds, which equals 4^α Γ(α) for every a > 0.
pub fn layer_mass(alpha: f64, a: f64, cfg: &QuadConfig) -> Result<f64, KernelError> {
    check_alpha(alpha)?;
    let a2 = a * a;
    let c = cfg.clone().with_pivot(a2 / 4.0);
    let r = integrate_halfline(
        |s: f64| (alpha * a2.ln() - a2 / (4.0 * s) - (1.0 + alpha) * s.ln()).exp(),
        &c,
    )?;
    Ok(r.value)
}

/// ∫_0^∞ |L_{a_hi}(s) − L_{a_lo}(s)| ds. The difference changes sign once, at
/// s* = (a_hi² − a_lo²) / (8α ln(a_hi/a_lo)), which is used as a break point.
pub fn layer_difference_l1(alpha: f64, a_lo: f64, a_hi: f64, cfg: &QuadConfig) -> Result<f64, KernelError> {
    check_alpha(alpha)?;
    let l = |a: f64, s: f64| (2.0 * alpha * a.ln() - a * a / (4.0 * s) - (1.0 + alpha) * s.ln()).exp();
    let s_star = (a_hi * a_hi - a_lo * a_lo) / (8.0 * alpha * (a_hi / a_lo).ln());
    let c = cfg.clone().with_split_points(vec![s_star]).with_pivot(a_lo * a_lo / 4.0);
    let r = integrate_positive(|s: f64| (l(a_hi, s) - l(a_lo, s)).abs(), 0.0, f64::INFINITY, &c)?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alt(j: i32) -> f64 {
        if j.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn spec(m: i32) -> LacunarySpec {
        LacunarySpec::geometric(2.0, -m - 1, m + 2, alt).unwrap()
    }

    #[test]
    fn kernel_vanishes_near_zero_and_rejects_bad_lags() {
        let sp = spec(4);
        let ke = KernelEval::new(&sp, WindowPair::new(-4, 4).unwrap(), 0.5).unwrap();
        let s = sp.a(-4).powi(2) * 1e-6;
        assert!(kernel_value(&ke, s).unwrap().abs() < 1e-30);
        assert!(kernel_dvalue(&ke, s).unwrap().abs() < 1e-30);
        assert!(kernel_value(&ke, 0.0).is_err());
        assert!(kernel_dvalue(&ke, -1.0).is_err());
    }

    #[test]
    fn summation_by_parts_matches_layer_differences() {
        let sp = spec(3);
        let alpha = 0.3;
        let w = WindowPair::new(-3, 2).unwrap();
        let ke = KernelEval::new(&sp, w, alpha).unwrap();
        let norm = 4f64.powf(alpha) * gamma(alpha);
        let l = |a: f64, s: f64| a.powf(2.0 * alpha) * (-a * a / (4.0 * s)).exp() / s.powf(1.0 + alpha);
        for s in [0.01, 0.3, 2.0, 17.0, 200.0] {
            let direct: f64 = (-3..=2).map(|j| sp.v(j) * (l(sp.a(j + 1), s) - l(sp.a(j), s))).sum::<f64>() / norm;
            let k = ke.value_at(s);
            assert!((k - direct).abs() <= 1e-12 * direct.abs().max(1e-300) + 1e-300, "{s}: {k} vs {direct}");
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let sp = LacunarySpec::geometric(2.0, 0, 6, |j| 1.0 / (1.0 + j as f64)).unwrap();
        let ke = KernelEval::new(&sp, WindowPair::new(0, 5).unwrap(), 0.4).unwrap();
        for s in [0.1, 1.0, 10.0] {
            let h = 1e-5 * s;
            let fd = (ke.value_at(s + h) - ke.value_at(s - h)) / (2.0 * h);
            let d = ke.dvalue_at(s);
            assert!((d - fd).abs() < 1e-6 * d.abs(), "{s}: {d} vs {fd}");
        }
    }

    #[test]
    fn sweep_is_linear_in_v() {
        let sp = spec(4);
        let w = WindowPair::new(-4, 4).unwrap();
        let grid = default_lag_grid(&sp, w, 40).unwrap();
        let one = bound_sweep(&KernelEval::new(&sp, w, 0.5).unwrap(), &grid);
        let two = bound_sweep(&KernelEval::new(&sp.scaled(2.0), w, 0.5).unwrap(), &grid);
        assert_eq!(two.sup_s_k, 2.0 * one.sup_s_k);
        assert_eq!(two.sup_s2_dk, 2.0 * one.sup_s2_dk);
        let zero = bound_sweep(&KernelEval::new(&sp.scaled(0.0), w, 0.5).unwrap(), &grid);
        assert_eq!((zero.sup_s_k, zero.sup_s2_dk), (0.0, 0.0));
    }

    #[test]
    fn grid_endpoints() {
        let g = geometric_grid(1e-3, 1e3, 10);
        assert_eq!(g.len(), 61);
        assert!((g[0] - 1e-3).abs() < 1e-18 && (g[60] - 1e3).abs() < 1e-9);
    }

    /// 2 z^{α/2} K_α(2√z) / Γ(α) with z = ix/4, evaluated at 30 digits.
    const M_REFERENCE: [(f64, f64, f64, f64); 18] = [
        (0.25, 1e-3, 0.842_953_905_271_802_4, -0.064_754_080_391_750_85),
        (0.25, 1e-1, 0.507_267_102_727_194_3, -0.182_302_820_826_196_28),
        (0.25, 1.0, 0.175_867_235_359_748_47, -0.205_551_543_281_084_67),
        (0.25, 10.0, -0.034_130_970_223_268_83, -0.030_323_660_276_277_486),
        (0.25, 100.0, 0.000_154_098_718_428_864_82, -0.000_228_783_292_048_515_4),
        (0.25, 1e4, -7.849_771_151_360_095e-33, -3.501_533_992_999_576_5e-32),
        (0.5, 1e-3, 0.977_643_005_524_632_5, -0.021_864_406_370_005_85),
        (0.5, 1e-1, 0.779_721_907_497_831, -0.177_316_288_394_047_18),
        (0.5, 1.0, 0.374_852_808_620_382_3, -0.320_315_635_434_215_5),
        (0.5, 10.0, -0.065_972_844_602_161_53, -0.084_086_115_194_876_2),
        (0.5, 100.0, 0.000_599_070_107_597_608_6, -0.000_602_054_116_238_485_5),
        (0.5, 1e4, -4.851_871_202_640_733e-33, -1.952_579_140_524_625_6e-31),
        (0.9, 1e-3, 0.999_113_807_480_644_4, -0.003_098_172_980_303_212_3),
        (0.9, 1e-1, 0.945_866_270_681_375_7, -0.103_940_809_163_833_26),
        (0.9, 1.0, 0.643_108_488_917_549_4, -0.359_453_553_101_398_05),
        (0.9, 10.0, -0.088_597_013_359_614_02, -0.208_235_083_200_956_99),
        (0.9, 100.0, 0.002_410_435_668_115_951_2, -0.001_292_549_675_469_007_3),
        (0.9, 1e4, 4.399_025_233_081_855e-31, -1.488_526_096_814_745_2e-30),
    ];

    #[test]
    fn multiplier_matches_bessel_reference() {
        let cfg = QuadConfig::default().with_tolerances(1e-11, 1e-15);
        for (alpha, x, re, im) in M_REFERENCE {
            let m = multiplier_m(alpha, x, &cfg).unwrap();
            let want = Complex64::new(re, im);
            assert!((m - want).norm() < 1e-9 * want.norm().max(1e-6), "{alpha} {x}: {m} vs {want}");
            let neg = multiplier_m(alpha, -x, &cfg).unwrap();
            assert_eq!(neg, m.conj());
        }
        assert_eq!(multiplier_m(0.5, 0.0, &cfg).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn multiplier_modulus_and_decay() {
        let cfg = QuadConfig::default();
        for x in [0.1, 1.0, 10.0, 100.0] {
            for s in [-1.0, 1.0] {
                assert!(multiplier_m(0.5, s * x, &cfg).unwrap().norm() <= 1.0);
            }
        }
        assert!(multiplier_m(0.5, 1e4, &cfg).unwrap().norm() < 0.05);
    }

    #[test]
    fn windowed_multiplier_telescopes() {
        let cfg = QuadConfig::default();
        let sp = spec(3);
        let w = WindowPair::new(-2, 2).unwrap();
        assert_eq!(multiplier_tn(&sp, w, 0.5, 0.0, &cfg).unwrap(), Complex64::new(0.0, 0.0));
        let ones = sp.with_multipliers(|_| 1.0);
        for rho in [1e-3, 0.1, 1.0, 7.0] {
            let m = multiplier_tn(&ones, w, 0.5, rho, &cfg).unwrap();
            let t = multiplier_m(0.5, sp.a(3).powi(2) * rho, &cfg).unwrap() - multiplier_m(0.5, sp.a(-2).powi(2) * rho, &cfg).unwrap();
            assert!((m - t).norm() < 1e-12);
            assert!(m.norm() <= 2.0);
        }
    }

    #[test]
    fn cached_sweep_matches_direct() {
        let cfg = QuadConfig::default();
        let sp = spec(2);
        let w = WindowPair::new(-2, 2).unwrap();
        let mut cache = MultiplierCache::new(0.5, MultiplierCache::aligned_step(2.0, 20), cfg.clone()).unwrap();
        let sw = cache.sweep(&sp, w, 1e-2, 1e2).unwrap();
        assert!(sw.freqs.len() > 50);
        for (f, v) in sw.freqs.iter().zip(&sw.values).step_by(7) {
            let d = multiplier_tn(&sp, w, 0.5, *f, &cfg).unwrap();
            assert!((d - v).norm() < 1e-9, "{f}");
        }
        let before = cache.len();
        cache.sweep(&sp, w, 1e-2, 1e2).unwrap();
        assert_eq!(cache.len(), before);
    }

    /// 2 K_{1−α}(2 z0), the common value of both sides, at 30 digits.
    const LEMMA_REFERENCE: [(f64, f64, f64, f64, f64); 9] = [
        (0.5, 1.0, 0.0, 0.239_875_543_936_122_9, 0.0),
        (0.25, 1.847_759_065_022_573_5, 0.765_366_864_730_179_5, -0.005_397_314_695_742_647_7, -0.031_715_330_375_358_82),
        (0.75, 3.535_533_905_932_737_6, 3.535_533_905_932_737_6, 0.000_258_229_535_858_298_5, -0.000_616_938_401_390_692_5),
        (0.1, 0.3, 0.0, 2.369_237_743_126_196, 0.0),
        (0.9, 2.121_320_343_559_642_6, -2.121_320_343_559_642_6, -0.001_299_208_834_922_54, -0.014_442_088_474_314_08),
        (0.5, 1.0, 1.0, -0.147_741_353_120_322_43, -0.137_330_303_787_218_3),
        (0.3, 0.461_939_766_255_643_4, -0.191_341_716_182_544_9, 0.889_680_116_184_848_5, 0.614_836_568_977_545_9),
        (0.6, 1.662_939_224_605_090_5, 1.111_140_466_039_204_4, -0.036_078_632_346_564_66, -0.026_306_011_139_882_64),
        (0.75, 0.141_421_356_237_309_5, 0.141_421_356_237_309_5, 2.176_964_003_900_307, -1.515_657_530_853_384_4),
    ];

    #[test]
    fn identity_sides_match_bessel_reference() {
        let cfg = QuadConfig::default().with_tolerances(1e-12, 1e-16);
        for (alpha, zr, zi, vr, vi) in LEMMA_REFERENCE {
            let r = contour_identity_check(alpha, Complex64::new(zr, zi), &cfg).unwrap();
            let want = Complex64::new(vr, vi);
            assert!((r.lhs - want).norm() < 1e-9 * want.norm(), "lhs {alpha} {zr} {zi}: {} vs {want}", r.lhs);
            assert!((r.rhs - want).norm() < 1e-9 * want.norm(), "rhs {alpha} {zr} {zi}: {} vs {want}", r.rhs);
        }
    }

    #[test]
    fn identity_rejects_outside_sector() {
        let cfg = QuadConfig::default();
        assert!(contour_identity_check(0.5, Complex64::new(1.0, 1.1), &cfg).is_err());
        assert!(contour_identity_check(0.5, Complex64::new(-1.0, 0.0), &cfg).is_err());
        assert!(contour_identity_check(1.5, Complex64::new(1.0, 0.0), &cfg).is_err());
    }

    #[test]
    fn layer_mass_and_difference_bound() {
        let cfg = QuadConfig::default().with_tolerances(1e-11, 1e-14);
        for alpha in [0.2, 0.5, 0.8] {
            let want = 4f64.powf(alpha) * gamma(alpha);
            for a in [0.01, 1.0, 3.0, 1e3] {
                assert!((layer_mass(alpha, a, &cfg).unwrap() - want).abs() < 1e-8 * want);
                let d = layer_difference_l1(alpha, a, 2.0 * a, &cfg).unwrap();
                assert!(d <= 2.0 * want + 1e-8, "{d}");
            }
        }
    }
}
