use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::funcspace::TestFunction;
use crate::kernel::{bound_sweep, contour_identity_check, window_frequency_range, KernelEval, MultiplierCache};
use crate::lacunary::{normalize, LacunarySpec, WindowPair};
use crate::maximal::{check_a1_minus, check_ap_minus, eps_grid, WeightKind};
use crate::poisson::{poisson_apply, PoissonParams};
use crate::quad::QuadConfig;
use crate::transform::{layer_differences, transform_apply, Path, TransformOptions};

use super::config::ladder;
use super::{alternating, geometric_spec, relative_drift, ExperimentConfig, ExperimentId, ExperimentReport, LabError};

const MASS_ALPHAS: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

/// Kernel mass at every (α, τ) of the 5×5 grid, then sup s|K_N| and sup s²|∂_s K_N| for
/// symmetric windows up to M and over all windows inside [−M, M].
pub fn run_kernel_bounds(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let mut rep = ExperimentReport::new(ExperimentId::KernelBounds);
    let quad = cfg.quad()?;
    let alpha = cfg.alpha_or(0.5)?;
    let base = cfg.base_or(2.0)?;
    let m_max = cfg.m_or(16, 2)?;
    let per_decade = 60;
    rep.param("alpha", alpha);
    rep.param("a", base);
    rep.param("M", m_max);
    rep.param("v", "(-1)^j");
    rep.param("lags_per_decade", per_decade);

    let taus: Vec<f64> = (0..5).map(|i| 10f64.powf(-2.0 + 0.75 * i as f64)).collect();
    let mut mass_csv = String::from("alpha,tau,mass,abs_error\n");
    let mut worst = 0.0f64;
    for &al in &MASS_ALPHAS {
        for &tau in &taus {
            let p = PoissonParams::new(al, tau)?;
            let mass = poisson_apply(&TestFunction::Constant(1.0), &p, 0.0, &quad)?;
            worst = worst.max((mass - 1.0).abs());
            writeln!(mass_csv, "{al},{tau},{mass},{}", (mass - 1.0).abs()).unwrap();
        }
    }
    rep.scalar("mass_max_error", worst);
    rep.artifact("mass.csv", mass_csv);
    rep.verdict("kernel-mass", worst < 1e-8, format!("max |P(1) - 1| = {worst:.3e} over 25 (alpha, tau), limit 1e-8"));

    let spec = geometric_spec(base, -m_max, m_max + 1, alternating)?;
    let du = MultiplierCache::aligned_step(base, per_decade);
    let lattice = |w: WindowPair| -> Vec<f64> {
        let lo = spec.a(w.n1()).powi(2) * 1e-3;
        let hi = spec.a(w.n2() + 1).powi(2) * 1e3;
        let k0 = (lo.ln() / du).floor() as i64;
        let k1 = (hi.ln() / du).ceil() as i64;
        (k0..=k1).map(|k| (k as f64 * du).exp()).collect()
    };
    let mut csv = String::from("M,alpha,rho,sup_sK,sup_s2dK\n");
    let (mut sk, mut sdk) = (Vec::new(), Vec::new());
    for m in ladder(2, m_max) {
        let w = WindowPair::symmetric(m)?;
        let ke = KernelEval::new(&spec, w, alpha)?;
        let b = bound_sweep(&ke, &lattice(w));
        writeln!(csv, "{m},{alpha},{base},{},{}", b.sup_s_k, b.sup_s2_dk).unwrap();
        rep.scalar(format!("sup_sK_M{m}"), b.sup_s_k);
        rep.scalar(format!("sup_s2dK_M{m}"), b.sup_s2_dk);
        sk.push(b.sup_s_k);
        sdk.push(b.sup_s2_dk);
    }
    rep.artifact("kernel_bounds.csv", csv);
    let (d1, d2) = (relative_drift(&sk), relative_drift(&sdk));
    rep.scalar("drift_sup_sK", d1);
    rep.scalar("drift_sup_s2dK", d2);
    rep.verdict(
        "kernel-bounds",
        d1 < 0.05 && d2 < 0.05,
        format!("drift across M: s|K| {:.2}%, s^2|K'| {:.2}%, limit 5%", 100.0 * d1, 100.0 * d2),
    );

    // sup over every window inside [-M, M], not only the symmetric one
    let mut all_csv = String::from("M,windows,sup_sK,sup_s2dK\n");
    let (mut wk, mut wdk) = (Vec::new(), Vec::new());
    for m in ladder(2, m_max) {
        let mut b_max = (0.0f64, 0.0f64);
        let mut count = 0;
        for n1 in -m..m {
            for n2 in n1 + 1..=m {
                let w = WindowPair::new(n1, n2)?;
                let b = bound_sweep(&KernelEval::new(&spec, w, alpha)?, &lattice(w));
                b_max = (b_max.0.max(b.sup_s_k), b_max.1.max(b.sup_s2_dk));
                count += 1;
            }
        }
        writeln!(all_csv, "{m},{count},{},{}", b_max.0, b_max.1).unwrap();
        wk.push(b_max.0);
        wdk.push(b_max.1);
    }
    rep.artifact("kernel_bounds_all_windows.csv", all_csv);
    let (e1, e2) = (relative_drift(&wk), relative_drift(&wdk));
    rep.scalar("all_windows_sup_sK", *wk.last().unwrap());
    rep.scalar("all_windows_sup_s2dK", *wdk.last().unwrap());
    rep.verdict(
        "kernel-bounds-all-windows",
        e1 < 0.05 && e2 < 0.05,
        format!("sup over all windows in [-M, M]: drift s|K| {:.2}%, s^2|K'| {:.2}%, limit 5%", 100.0 * e1, 100.0 * e2),
    );
    Ok(rep)
}

/// (α, |z0|, arg z0) for the contour identity check.
pub const CONTOUR_PAIRS: [(f64, f64, f64); 9] = [
    (0.5, 1.0, 0.0),
    (0.25, 2.0, FRAC_PI_8),
    (0.75, 5.0, FRAC_PI_4),
    (0.1, 0.3, 0.0),
    (0.9, 3.0, -FRAC_PI_4),
    (0.5, std::f64::consts::SQRT_2, FRAC_PI_4),
    (0.3, 0.5, -FRAC_PI_8),
    (0.6, 2.0, 3.0 * FRAC_PI_8 / 2.0),
    (0.75, 0.2, FRAC_PI_4),
];

pub fn run_contour_identity(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let mut rep = ExperimentReport::new(ExperimentId::ContourIdentity);
    let quad = match cfg.rel_tol {
        Some(_) => cfg.quad()?,
        None => QuadConfig::default().with_tolerances(1e-12, 1e-16),
    };
    rep.param("rel_tol", quad.rel_tol);
    let mut csv = String::from("alpha,z_re,z_im,lhs_re,lhs_im,rhs_re,rhs_im,rel_diff\n");
    let mut worst = 0.0f64;
    for (alpha, r, th) in CONTOUR_PAIRS {
        let z = Complex64::from_polar(r, th);
        let c = contour_identity_check(alpha, z, &quad)?;
        let rel = c.rel_diff();
        worst = worst.max(rel);
        writeln!(csv, "{alpha},{},{},{},{},{},{},{rel}", z.re, z.im, c.lhs.re, c.lhs.im, c.rhs.re, c.rhs.im).unwrap();
    }
    rep.artifact("lemma21.csv", csv);
    rep.scalar("max_rel_diff", worst);
    rep.verdict("contour-identity", worst < 1e-6, format!("max relative |lhs - rhs| = {worst:.3e} over 9 pairs, limit 1e-6"));
    Ok(rep)
}

/// sup |m_N| over a frequency lattice aligned with the sequence, for symmetric windows up to M.
pub fn run_multiplier(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let mut rep = ExperimentReport::new(ExperimentId::Multiplier);
    let alpha = cfg.alpha_or(0.5)?;
    let base = cfg.base_or(2.0)?;
    let m_max = cfg.m_or(16, 2)?;
    let per_decade = 400;
    rep.param("alpha", alpha);
    rep.param("a", base);
    rep.param("M", m_max);
    rep.param("v", "(-1)^j");
    rep.param("freqs_per_decade", per_decade);
    let spec = geometric_spec(base, -m_max, m_max + 1, alternating)?;
    let mut cache = MultiplierCache::new(alpha, MultiplierCache::aligned_step(base, per_decade), cfg.quad()?)?;
    let mut csv = String::from("M,alpha,freq,re_m,im_m,abs_m\n");
    let mut sups = Vec::new();
    for m in ladder(2, m_max) {
        let w = WindowPair::symmetric(m)?;
        let (lo, hi) = window_frequency_range(&spec, w)?;
        let sweep = cache.sweep(&spec, w, lo, hi)?;
        for (f, v) in sweep.freqs.iter().zip(&sweep.values) {
            writeln!(csv, "{m},{alpha},{f:e},{:e},{:e},{:e}", v.re, v.im, v.norm()).unwrap();
        }
        let (sup, at) = sweep.sup();
        rep.scalar(format!("sup_abs_m_M{m}"), sup);
        rep.scalar(format!("argsup_freq_M{m}"), at);
        // the same sweep restricted to the fixed band [1e-4, 1e4]
        let band = sweep
            .freqs
            .iter()
            .zip(&sweep.values)
            .filter(|(f, _)| (1e-4..=1e4).contains(*f))
            .fold(0.0f64, |acc, (_, v)| acc.max(v.norm()));
        rep.scalar(format!("sup_abs_m_fixed_band_M{m}"), band);
        sups.push(sup);
    }
    rep.artifact("multiplier.csv", csv);
    let d = relative_drift(&sups);
    rep.scalar("drift", d);
    rep.scalar("cached_multiplier_values", cache.len() as f64);
    rep.verdict("uniform-multiplier", d < 0.10, format!("drift of sup |m_N| across M = {:.2}%, limit 10%", 100.0 * d));
    Ok(rep)
}

fn default_sequence(rho: f64) -> Result<LacunarySpec, LabError> {
    Ok(LacunarySpec::new(
        rho,
        -3,
        vec![0.01, 0.03, 0.5, 1.0, 2.5, 40.0, 100.0],
        vec![0.7, -1.3, 0.4, 1.1, -0.6, 0.9, -0.2],
    )?)
}

/// Normalizes a lacunary sequence and checks that the transform is unchanged.
pub fn run_normalize(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let mut rep = ExperimentReport::new(ExperimentId::Normalize);
    let spec = match &cfg.sequence {
        Some(text) => LacunarySpec::from_text(text)?,
        None => default_sequence(cfg.rho.unwrap_or(2.0))?,
    };
    let alpha = cfg.alpha_or(0.5)?;
    rep.param("alpha", alpha);
    rep.param("rho", spec.rho());
    rep.param("j_range", format!("{}..{}", spec.j_min(), spec.j_max()));
    let ns = normalize(&spec);
    let again = normalize(ns.as_spec());
    let idem = again.eta() == ns.eta() && again.omega() == ns.omega();
    rep.verdict("normalize-idempotent", idem, format!("second pass {} the sequence", if idem { "keeps" } else { "changes" }));

    let (sv, so) = (spec.v_sup(), ns.as_spec().v_sup());
    rep.verdict("normalize-sup", sv == so, format!("sup|v| = {sv}, sup|omega| = {so}"));

    let rho = spec.rho();
    let ratios_ok = ns
        .eta()
        .windows(2)
        .all(|w| w[1] / w[0] >= rho * (1.0 - 1e-12) && w[1] / w[0] <= rho * rho * (1.0 + 1e-12));
    let all_present = (spec.j_min()..=spec.j_max()).all(|j| ns.position(j).is_some_and(|k| ns.as_spec().a(k) == spec.a(j)));
    rep.verdict(
        "normalize-ratios",
        ratios_ok && all_present,
        format!("{} points, ratios in [rho, rho^2]: {ratios_ok}, every a_j kept: {all_present}", ns.eta().len()),
    );

    let f = TestFunction::SmoothBump { center: 0.5, halfwidth: 1.0 };
    let opts = TransformOptions::quadrature_only(cfg.quad()?);
    let full = WindowPair::new(spec.j_min(), spec.j_max() - 1)?;
    let mut windows = vec![full];
    if spec.j_max() - spec.j_min() >= 4 {
        windows.push(WindowPair::new(spec.j_min() + 1, spec.j_max() - 2)?);
    }
    let mut csv = String::from("t,N1,N2,N1_normalized,N2_normalized,original,normalized,abs_diff\n");
    let mut worst = 0.0f64;
    for i in 0..10 {
        let t = -0.45 + 0.37 * i as f64;
        for &w in &windows {
            let wn = ns.map_window(w)?;
            let a = transform_apply(&f, &spec, alpha, w, t, Path::PoissonDiff, &opts)?;
            let b = transform_apply(&f, ns.as_spec(), alpha, wn, t, Path::PoissonDiff, &opts)?;
            worst = worst.max((a - b).abs());
            writeln!(csv, "{t},{},{},{},{},{a},{b},{}", w.n1(), w.n2(), wn.n1(), wn.n2(), (a - b).abs()).unwrap();
        }
    }
    rep.scalar("transform_max_diff", worst);
    rep.verdict("normalize-transform", worst < 1e-7, format!("max |T_N - T_N'| = {worst:.3e} at 10 points, limit 1e-7"));

    // each layer difference splits into the normalized layers of J(j)
    let t = 0.3;
    let d = layer_differences(&f, &spec, alpha, full.n1(), full.n2(), t, &opts)?;
    let wn = ns.map_window(full)?;
    let dn = layer_differences(&f, ns.as_spec(), alpha, wn.n1(), wn.n2(), t, &opts)?;
    let mut worst_layer = 0.0f64;
    for (i, j) in (full.n1()..=full.n2()).enumerate() {
        let sum: f64 = ns.remap(j).unwrap().map(|k| dn[(k - wn.n1()) as usize]).sum();
        worst_layer = worst_layer.max((sum - d[i]).abs());
    }
    rep.scalar("layer_split_max_diff", worst_layer);
    rep.verdict("normalize-layers", worst_layer < 1e-8, format!("max |d_j - sum over J(j)| = {worst_layer:.3e}, limit 1e-8"));

    let mut map_csv = String::from("k,eta,omega,source_j\n");
    for (i, (e, o)) in ns.eta().iter().zip(ns.omega()).enumerate() {
        let k = ns.k_min() + i as i32;
        let src = (spec.j_min()..=spec.j_max())
            .find(|&j| ns.remap(j).is_some_and(|r| r.contains(&k)))
            .map(|j| j.to_string())
            .unwrap_or_default();
        writeln!(map_csv, "{k},{e},{o},{src}").unwrap();
    }
    rep.artifact("normalization.csv", map_csv);
    rep.artifact("normalized.txt", ns.as_spec().to_text());
    Ok(rep)
}

/// A_1^- and A_p^- checks on 1, e^{−t}, e^{t}.
pub fn run_weights(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let mut rep = ExperimentReport::new(ExperimentId::Weights);
    let grid = cfg.grid_or(-4.0, 4.0, 1.0 / 64.0)?;
    rep.param("grid", format!("[{}, {}] step {}", grid.lo(), grid.hi(), grid.step()));
    let eps = eps_grid(grid.step(), grid.hi() - grid.lo());
    let budget = 200_000;
    let ps = [1.5, 2.0, 4.0];
    for kind in [WeightKind::Unit, WeightKind::ExpDecay, WeightKind::ExpGrowth] {
        let w = kind.sample(grid)?;
        let mut csv = String::from("p,constant,constant_half_range,pass\n");
        let a1 = check_a1_minus(&w, &eps);
        writeln!(csv, "1,{},{},{}", a1.constant, a1.constant_half_range, a1.pass).unwrap();
        rep.scalar(format!("{}_a1_constant", kind.name()), a1.constant);
        let mut ap_pass = Vec::new();
        for p in ps {
            let c = check_ap_minus(&w, p, budget)?;
            writeln!(csv, "{p},{},{},{}", c.constant, c.constant_half_range, c.pass).unwrap();
            rep.scalar(format!("{}_a{p}_constant", kind.name()), c.constant);
            ap_pass.push(c.pass);
        }
        rep.artifact(&format!("weights_{}.csv", kind.name()), csv);
        match kind {
            WeightKind::Unit => rep.verdict(
                "weights-unit",
                a1.pass && (a1.constant - 1.0).abs() < 1e-12 && ap_pass.iter().all(|p| *p),
                format!("A1 constant {:.6}, Ap passes {ap_pass:?}", a1.constant),
            ),
            WeightKind::ExpDecay => rep.verdict(
                "weights-exp-decay-a1",
                a1.pass && (a1.constant - 1.0).abs() < 0.05 && ap_pass.iter().all(|p| *p),
                format!("A1 constant {:.6} (within 5% of 1 required), Ap passes {ap_pass:?}", a1.constant),
            ),
            WeightKind::ExpGrowth => rep.verdict(
                "weights-exp-growth-rejected",
                !a1.pass && !ap_pass[1],
                format!(
                    "A1 constant {:.4e} vs {:.4e} on half the radii, p=2 constant grows: {}",
                    a1.constant, a1.constant_half_range, !ap_pass[1]
                ),
            ),
        }
    }
    Ok(rep)
}
