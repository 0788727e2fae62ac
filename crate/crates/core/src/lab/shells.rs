use std::fmt::Write as _;

use crate::funcspace::TestFunction;
use crate::poisson::{poisson_apply_exact, PoissonParams};
use crate::quad::{integrate_positive, QuadConfig};
use crate::special::gamma;
use crate::transform::{layer_differences, poisson_layers, sup_over_windows, TransformOptions};

use super::config::ladder;
use super::{alternating, geometric_spec, linear_fit, ExperimentConfig, ExperimentId, ExperimentReport, LabError};

const SCAN_LIMIT: u32 = 50;
const ETA_STEP: f64 = 1e-3;

/// ∫_lo^hi e^{−1/(4u)} u^{−α−1} du by quadrature; `hi` may be infinite.
pub fn shell_integral(alpha: f64, lo: f64, hi: f64, cfg: &QuadConfig) -> Result<f64, LabError> {
    if !(hi > lo) {
        return Ok(0.0);
    }
    let c = cfg.clone().with_pivot(0.25);
    let r = integrate_positive(|u: f64| (-0.25 / u - (alpha + 1.0) * u.ln()).exp(), lo, hi, &c)?;
    Ok(r.value)
}

/// ∫_0^∞ e^{−1/(4u)} u^{−α−1} f(−u) du for a shell function whose pieces on the positive
/// axis are [a^{n}, a^{n+1}) with sign `sign(n)`, summed over n in `ns` until negligible.
fn shell_constant(alpha: f64, a: f64, cfg: &QuadConfig, pieces: impl Iterator<Item = (i32, f64)>) -> Result<f64, LabError> {
    let mut sum = 0.0;
    for (n, sign) in pieces {
        let lo = a.powi(n);
        let hi = a.powi(n + 1);
        let part = shell_integral(alpha, lo, hi, cfg)?;
        sum += sign * part;
    }
    Ok(sum)
}

/// Range of shell indices n with a non-negligible integral: g is below e^{−60} relative for
/// u < 1/240, and the tail beyond a^n is about a^{−nα}/α.
fn shell_index_range(alpha: f64, a: f64) -> (i32, i32) {
    let lo = ((1.0 / 240.0f64).ln() / a.ln()).floor() as i32 - 1;
    let hi = ((1e17f64 / alpha).ln() / (alpha * a.ln())).ceil() as i32 + 1;
    (lo, hi)
}

/// Both-sided shells: f(−u) = (−1)^k on [a^{2k}, a^{2k+1}).
fn both_sided_constant(alpha: f64, a: f64, cfg: &QuadConfig) -> Result<f64, LabError> {
    let (lo, hi) = shell_index_range(alpha, a);
    let pieces = (lo..=hi)
        .filter(|n| n.rem_euclid(2) == 0)
        .map(|n| (n, alternating(n / 2)));
    shell_constant(alpha, a, cfg, pieces)
}

/// Unit shells: f(−u) = (−1)^k on [a^{2k−1}, a^{2k}), k <= 0.
fn unit_constant(alpha: f64, a: f64, cfg: &QuadConfig) -> Result<f64, LabError> {
    let (lo, _) = shell_index_range(alpha, a);
    let pieces = (lo..=-1)
        .filter(|n| n.rem_euclid(2) == 1)
        .map(|n| (n, alternating((n + 1) / 2)));
    shell_constant(alpha, a, cfg, pieces)
}

/// Largest h on the 1e−3 lattice with ∫ g(u) f(±h' − u) du >= C₁/2 for all |h'| <= h.
fn eta_scan(f: &TestFunction, alpha: f64, c1: f64, csv: &mut String) -> Result<f64, LabError> {
    let p = PoissonParams::new(alpha, 1.0)?;
    let norm = p.norm();
    let i_at = |h: f64| poisson_apply_exact(f, &p, h).map(|v| v * norm).unwrap_or(f64::NAN);
    csv.push_str("h,I_plus,I_minus\n");
    let mut eta = 0.0;
    let mut k = 1;
    while (k as f64) * ETA_STEP < 1.0 {
        let h = k as f64 * ETA_STEP;
        let (ip, im) = (i_at(h), i_at(-h));
        writeln!(csv, "{h},{ip},{im}").unwrap();
        if !(ip.min(im) >= 0.5 * c1) {
            break;
        }
        eta = h;
        k += 1;
    }
    Ok(eta)
}

/// The Poisson kernel normalization 4^α Γ(α).
fn kernel_norm(alpha: f64) -> f64 {
    4f64.powf(alpha) * gamma(alpha)
}

/// Divergence at t = 0 of the alternating transform applied to the both-sided shell function.
pub fn run_divergence(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let mut rep = ExperimentReport::new(ExperimentId::Diverge);
    let alpha = cfg.alpha_or(0.5)?;
    let m = cfg.m_or(16, 4)?;
    let quad = match cfg.rel_tol {
        Some(_) => cfg.quad()?,
        None => QuadConfig::default().with_tolerances(1e-11, 1e-15),
    };
    let g = |lo: f64, hi: f64| shell_integral(alpha, lo, hi, &quad);

    let mut scan_csv = String::from("a,middle,tails,holds\n");
    let a = match cfg.a {
        Some(a) => cfg.base_or(a)?,
        None => {
            let mut found = None;
            for ai in 3..=SCAN_LIMIT {
                let a = ai as f64;
                let middle = g(1.0, a)?;
                let tails = g(0.0, 1.0 / a)? + g(a * a, f64::INFINITY)?;
                writeln!(scan_csv, "{a},{middle},{tails},{}", middle > tails).unwrap();
                if middle > tails {
                    found = Some(a);
                    break;
                }
            }
            found.ok_or(LabError::ScanExhausted { limit: SCAN_LIMIT })?
        }
    };
    rep.artifact("a_scan.csv", scan_csv);
    rep.param("alpha", alpha);
    rep.param("a", a);
    rep.param("M", m);
    rep.param("v", "(-1)^(j+1)");

    let c1 = both_sided_constant(alpha, a, &quad)?;
    let norm = kernel_norm(alpha);
    let delta = 2.0 * c1 / norm;
    rep.scalar("C1", c1);
    rep.scalar("increment_expected", delta);

    let f = TestFunction::AlternatingShellsBothSided { a };
    let spec = geometric_spec(a, -m, m + 1, |j| -alternating(j))?;
    let opts = TransformOptions::default();
    let d = layer_differences(&f, &spec, alpha, -m, m, 0.0, &opts)?;
    let inc: Vec<f64> = (-m..=m).zip(&d).map(|(j, dj)| spec.v(j) * dj).collect();

    let mut inc_csv = String::from("j,increment,expected,rel_err\n");
    let mut worst_inc = 0.0f64;
    for (j, x) in (-m..=m).zip(&inc) {
        let e = (x - delta).abs() / delta;
        worst_inc = worst_inc.max(e);
        writeln!(inc_csv, "{j},{x},{delta},{e}").unwrap();
    }
    rep.artifact("increments.csv", inc_csv);
    rep.scalar("increment_max_rel_err", worst_inc);
    rep.verdict(
        "divergence-increments",
        worst_inc < 1e-5,
        format!("{} increments at t=0 vs 2C1/(4^a G(a)) = {delta:.10}: max rel err {worst_inc:.3e}, limit 1e-5", inc.len()),
    );

    let mut sum_csv = String::from("L,N1,N2,partial_sum,expected\n");
    let mut worst_lin = 0.0f64;
    let mut acc = 0.0;
    for l in 1..=2 * m {
        acc += inc[(l - 1) as usize];
        let want = l as f64 * delta;
        worst_lin = worst_lin.max((acc - want).abs() / want);
        writeln!(sum_csv, "{l},{},{},{acc},{want}", -m, -m + l - 1).unwrap();
    }
    rep.scalar("partial_sum_max_rel_err", worst_lin);

    let mut per_len = Vec::new();
    for mm in ladder(4, m) {
        let v: f64 = inc[(m - mm) as usize..=(m + mm) as usize].iter().sum();
        let q = v / (2 * mm + 1) as f64;
        rep.scalar(format!("T_sym_over_len_M{mm}"), q);
        per_len.push(q);
    }
    let spread = per_len.iter().map(|q| (q - delta).abs() / delta).fold(0.0, f64::max);
    rep.verdict(
        "divergence-linear",
        worst_lin < 1e-5 && spread < 1e-5,
        format!(
            "partial sums over lengths 1..{}: max rel deviation from L*increment {worst_lin:.3e}; T_(-M,M)(0)/(2M+1) within {spread:.3e} of the increment",
            2 * m
        ),
    );

    // v ≡ 1: the sums telescope to P_{a_{N2+1}} f(0) − P_{a_{−M}} f(0)
    let mut ctl_csv = String::from("L,partial_sum_unit_v\n");
    let mut acc = 0.0;
    let mut ctl_max = 0.0f64;
    for l in 1..=2 * m {
        acc += d[(l - 1) as usize];
        ctl_max = ctl_max.max(acc.abs());
        writeln!(ctl_csv, "{l},{acc}").unwrap();
    }
    rep.artifact("partial_sums.csv", sum_csv);
    rep.artifact("control.csv", ctl_csv);
    rep.scalar("control_max_abs", ctl_max);
    rep.verdict(
        "divergence-control",
        ctl_max <= delta * (1.0 + 1e-6),
        format!("v = 1 partial sums stay within {ctl_max:.6} <= 2C1/(4^a G(a)) = {delta:.6}"),
    );

    let mut eta_csv = String::new();
    let eta0 = eta_scan(&f, alpha, c1, &mut eta_csv)?;
    rep.artifact("eta_scan.csv", eta_csv);
    rep.scalar("eta0", eta0);

    // away from 0 the layers with |t|/a^{2j} < η₀ each add at least C₁/(4^α Γ(α))
    let mut t_csv = String::from("t,j,L,partial_sum,lower_bound\n");
    let mut all_ok = eta0 > 0.0;
    let mut checked = 0;
    for t in [0.37f64, -0.81, 2.3, -5.0] {
        let j0 = ((t.abs() / eta0).ln() / (2.0 * a.ln())).floor() as i32 + 1;
        let j0 = j0.max(-m);
        if j0 > m {
            continue;
        }
        let dd = layer_differences(&f, &spec, alpha, j0, m, t, &opts)?;
        let mut acc = 0.0;
        for (i, j) in (j0..=m).enumerate() {
            acc += spec.v(j) * dd[i];
            let l = i + 1;
            let lower = l as f64 * c1 / norm;
            all_ok &= acc >= lower;
            checked += 1;
            writeln!(t_csv, "{t},{j},{l},{acc},{lower}").unwrap();
        }
    }
    rep.artifact("growth_off_origin.csv", t_csv);
    rep.verdict(
        "divergence-off-origin",
        all_ok && checked > 0,
        format!("eta0 = {eta0}; {checked} partial sums at t in {{0.37, -0.81, 2.3, -5}} all >= L*C1/(4^a G(a))"),
    );
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Variant {
    /// v_j = (−1)^{j+1}
    Alternating,
    /// v_j = (−1)^{j+1} a^{−|j|}, summable
    Summable,
    /// v_j = (−1)^{j+1} max(|j|, 1)^{−1/(p−ε)}
    Power(f64),
}

impl Variant {
    fn name(self) -> &'static str {
        match self {
            Variant::Alternating => "c",
            Variant::Summable => "a",
            Variant::Power(_) => "b",
        }
    }
    fn v(self, a: f64, j: i32) -> f64 {
        let s = -alternating(j);
        match self {
            Variant::Alternating => s,
            Variant::Summable => s * a.powi(-j.abs()),
            Variant::Power(e) => s * (j.abs().max(1) as f64).powf(-1.0 / e),
        }
    }
}

/// Local means of T* f over [−r, r] for the unit shell function, with exponent fits.
pub fn run_growth(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let mut rep = ExperimentReport::new(ExperimentId::Growth);
    let alpha = cfg.alpha_or(0.5)?;
    let p = cfg.p_or(2.0, 1.0)?;
    let eps = cfg.eps.unwrap_or(0.5);
    if !(eps > 0.0 && eps < p - 1.0) {
        return Err(LabError::InvalidConfig(format!("eps must lie in (0, p - 1), got {eps}")));
    }
    let quad = match cfg.rel_tol {
        Some(_) => cfg.quad()?,
        None => QuadConfig::default().with_tolerances(1e-11, 1e-15),
    };
    let g = |lo: f64, hi: f64| shell_integral(alpha, lo, hi, &quad);

    let mut scan_csv = String::from("a,middle,tails,holds_10x,holds_1x\n");
    let a = match cfg.a {
        Some(a) => cfg.base_or(a)?,
        None => {
            let mut strict = None;
            let mut plain = None;
            for ai in 3..=SCAN_LIMIT {
                let a = ai as f64;
                let middle = g(1.0 / a, 1.0)?;
                let tails = g(0.0, 1.0 / (a * a))? + g(a - 1.0, f64::INFINITY)?;
                writeln!(scan_csv, "{a},{middle},{tails},{},{}", middle >= 10.0 * tails, middle > tails).unwrap();
                if plain.is_none() && middle > tails {
                    plain = Some(a);
                }
                if middle >= 10.0 * tails {
                    strict = Some(a);
                    break;
                }
            }
            match (strict, plain) {
                (Some(a), _) => a,
                (None, Some(a)) => {
                    rep.note(format!(
                        "no a <= {SCAN_LIMIT} meets the tenfold tail margin at alpha = {alpha}; using the first a with middle > tails"
                    ));
                    a
                }
                (None, None) => return Err(LabError::ScanExhausted { limit: SCAN_LIMIT }),
            }
        }
    };
    rep.artifact("a_scan.csv", scan_csv);
    let pe = p - eps;
    let variants = [Variant::Alternating, Variant::Summable, Variant::Power(pe)];
    rep.param("alpha", alpha);
    rep.param("a", a);
    rep.param("p", p);
    rep.param("eps", eps);

    let f = TestFunction::AlternatingShellsUnit { a };
    let c1 = unit_constant(alpha, a, &quad)?;
    rep.scalar("C1", c1);
    let mut eta_csv = String::new();
    let eta0 = eta_scan(&f, alpha, c1, &mut eta_csv)?;
    rep.artifact("eta_scan.csv", eta_csv);
    rep.scalar("eta0", eta0);
    if !(eta0 > 0.0) {
        return Err(LabError::InvalidConfig("the eta0 scan found no admissible h".into()));
    }

    let midpoints = 48;
    let opts = TransformOptions::default();
    let mut radii = Vec::new();
    for j0 in (-6..=-1).rev() {
        let r = 2f64.powi((a.powi(2 * j0) * eta0).log2().round() as i32);
        if 2.0 * r < 1.0 && !radii.iter().any(|(_, q)| *q == r) {
            radii.push((j0, r));
        }
    }
    if radii.len() < 4 {
        return Err(LabError::FitDegenerate(radii.len()));
    }

    let mut csv = String::from("variant,J0,r,log2_r,levels,mean\n");
    let mut means: Vec<Vec<f64>> = vec![Vec::new(); variants.len()];
    for &(j0, r) in &radii {
        let mm = ((1e6 / r).ln() / (2.0 * a.ln())).ceil() as i32 + 2;
        let spec = geometric_spec(a, -mm, mm + 1, |_| 1.0)?;
        let mut sums = vec![0.0; variants.len()];
        for i in 0..midpoints {
            let t = -r + (i as f64 + 0.5) * 2.0 * r / midpoints as f64;
            let layers = poisson_layers(&f, &spec, alpha, -mm, mm + 1, t, &opts)?;
            let d: Vec<f64> = layers.windows(2).map(|w| w[1] - w[0]).collect();
            for (k, var) in variants.iter().enumerate() {
                let terms: Vec<f64> = (-mm..=mm).zip(&d).map(|(j, dj)| var.v(a, j) * dj).collect();
                sums[k] += sup_over_windows(&terms);
            }
        }
        for (k, var) in variants.iter().enumerate() {
            let mean = sums[k] / midpoints as f64;
            means[k].push(mean);
            writeln!(csv, "{},{j0},{r:e},{},{mm},{mean}", var.name(), r.log2()).unwrap();
        }
    }
    rep.artifact("growth.csv", csv);

    let x: Vec<f64> = radii.iter().map(|(_, r)| (2.0 / r).ln().ln()).collect();
    let orders = radii.first().unwrap().1.log2() - radii.last().unwrap().1.log2();
    rep.scalar("binary_orders_spanned", orders);
    let mut theta = Vec::new();
    for (k, var) in variants.iter().enumerate() {
        let y: Vec<f64> = means[k].iter().map(|m| m.ln()).collect();
        let (s, _) = linear_fit(&x, &y);
        rep.scalar(format!("theta_{}", var.name()), s);
        theta.push(s);
    }
    let span_ok = orders >= 5.0;
    rep.verdict(
        "growth-linear",
        span_ok && (0.8..=1.2).contains(&theta[0]),
        format!("v = (-1)^(j+1): fitted exponent {:.4} over {orders} binary orders, required [0.8, 1.2]", theta[0]),
    );
    rep.verdict(
        "growth-summable",
        span_ok && (-0.1..=0.1).contains(&theta[1]),
        format!("summable v (p = 1): fitted exponent {:.4}, required [-0.1, 0.1]", theta[1]),
    );
    let lower = 1.0 - 1.0 / pe - 0.1;
    rep.verdict(
        "growth-power",
        span_ok && theta[2] >= lower,
        format!("v_j ~ |j|^(-1/{pe}): fitted exponent {:.4}, required >= {lower:.4}", theta[2]),
    );
    Ok(rep)
}
