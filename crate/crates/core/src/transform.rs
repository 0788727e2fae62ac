//! Differential transforms T_N f = Σ_{j=N1}^{N2} v_j (P_{a_{j+1}} f − P_{a_j} f), the
//! truncated maximal operator T*_M, and the empirical Cotlar constant.

use std::fmt::Write as _;

use thiserror::Error;

use crate::funcspace::{Grid, TestFunction};
use crate::kernel::{KernelError, KernelEval};
use crate::lacunary::{window_indices, LacunaryError, LacunarySpec, WindowPair};
use crate::maximal::{eps_grid, m_minus_field, m_minus_q_field, MaximalError};
use crate::poisson::{poisson_apply, poisson_apply_exact, PoissonError, PoissonParams};
use crate::quad::{integrate_positive, QuadConfig, QuadError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Lacunary(#[from] LacunaryError),
    #[error(transparent)]
    Maximal(#[from] MaximalError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("the sequence must cover indices [{lo}, {hi}]")]
    SpecTooShort { lo: i32, hi: i32 },
    #[error("{excluded} of {total} grid points have a vanishing denominator")]
    DegenerateDenominator { excluded: usize, total: usize },
}

/// How T_N f(t) is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    /// Σ v_j (P_{a_{j+1}} f(t) − P_{a_j} f(t))
    PoissonDiff,
    /// ∫_0^∞ K_N(s) f(t − s) ds
    KernelConv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformOptions {
    pub quad: QuadConfig,
    /// Use incomplete-gamma masses for P_τ f when f is piecewise constant.
    pub closed_form: bool,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            quad: QuadConfig::default(),
            closed_form: true,
        }
    }
}

impl TransformOptions {
    pub fn quadrature_only(quad: QuadConfig) -> Self {
        TransformOptions {
            quad,
            closed_form: false,
        }
    }
}

fn poisson_value(f: &TestFunction, p: &PoissonParams, t: f64, opts: &TransformOptions) -> Result<f64, PoissonError> {
    if opts.closed_form {
        if let Some(v) = poisson_apply_exact(f, p, t) {
            return Ok(v);
        }
    }
    poisson_apply(f, p, t, &opts.quad)
}

/// P_{a_j} f(t) for j = lo..=hi.
pub fn poisson_layers(
    f: &TestFunction,
    spec: &LacunarySpec,
    alpha: f64,
    lo: i32,
    hi: i32,
    t: f64,
    opts: &TransformOptions,
) -> Result<Vec<f64>, TransformError> {
    (lo..=hi)
        .map(|j| {
            let p = PoissonParams::new(alpha, spec.try_a(j)?)?;
            Ok(poisson_value(f, &p, t, opts)?)
        })
        .collect()
}

/// Layer differences d_j(t) = P_{a_{j+1}} f(t) − P_{a_j} f(t) for j = lo..=hi.
pub fn layer_differences(
    f: &TestFunction,
    spec: &LacunarySpec,
    alpha: f64,
    lo: i32,
    hi: i32,
    t: f64,
    opts: &TransformOptions,
) -> Result<Vec<f64>, TransformError> {
    let p = poisson_layers(f, spec, alpha, lo, hi + 1, t, opts)?;
    Ok(p.windows(2).map(|w| w[1] - w[0]).collect())
}

pub fn transform_apply(
    f: &TestFunction,
    spec: &LacunarySpec,
    alpha: f64,
    window: WindowPair,
    t: f64,
    path: Path,
    opts: &TransformOptions,
) -> Result<f64, TransformError> {
    let range = window_indices(spec, window)?;
    match path {
        Path::PoissonDiff => {
            let d = layer_differences(f, spec, alpha, window.n1(), window.n2(), t, opts)?;
            Ok(range.zip(d).map(|(j, dj)| spec.v(j) * dj).sum())
        }
        Path::KernelConv => kernel_convolution(f, spec, alpha, window, t, &opts.quad),
    }
}

fn kernel_convolution(
    f: &TestFunction,
    spec: &LacunarySpec,
    alpha: f64,
    window: WindowPair,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64, TransformError> {
    let ke = KernelEval::new(spec, window, alpha)?;
    let (lo, hi) = f.support();
    let s_lo = (t - hi).max(0.0);
    let s_hi = if lo.is_infinite() { f64::INFINITY } else { t - lo };
    if !(s_hi > s_lo) {
        return Ok(0.0);
    }
    let a_lo = spec.a(window.n1());
    let a_hi = spec.a(window.n2() + 1);
    let near = a_lo * a_lo / 2800.0;
    let far = a_hi * a_hi * 1e20;
    let mut pts: Vec<f64> = f.jumps_in(t - far, t - near, near * 1e-10).into_iter().map(|x| t - x).collect();
    pts.extend((window.n1()..=window.n2() + 1).map(|k| spec.a(k).powi(2) / 4.0));
    pts.extend(cfg.split_points.iter().copied());
    let c = cfg.clone().with_split_points(pts).with_pivot(a_lo * a_lo / 4.0);
    Ok(integrate_positive(|s: f64| ke.value_at(s) * f.eval(t - s), s_lo, s_hi, &c)?.value)
}

/// max |S_k − S_i| over k − i >= 2, where S are the prefix sums of `terms`:
/// the sup of |Σ_{j=N1}^{N2} terms_j| over windows with N1 < N2.
pub fn sup_over_windows(terms: &[f64]) -> f64 {
    let mut s = Vec::with_capacity(terms.len() + 1);
    s.push(0.0);
    let mut acc = 0.0;
    for x in terms {
        acc += x;
        s.push(acc);
    }
    let mut best = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 2..s.len() {
        lo = lo.min(s[k - 2]);
        hi = hi.max(s[k - 2]);
        best = best.max((s[k] - lo).abs()).max((s[k] - hi).abs());
    }
    best
}

/// v_j d_j(t) for j in [−M, M] at every grid point, with T*_M and T_{(−M,M)}.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformField {
    pub grid: Grid,
    pub m: i32,
    /// per grid point, v_j d_j for j = −M..=M
    pub terms: Vec<Vec<f64>>,
    pub tstar: Vec<f64>,
    /// T_{(−M,M)} f
    pub full: Vec<f64>,
}

impl TransformField {
    /// T_N f at grid index i for a window inside [−M, M].
    pub fn window_value(&self, i: usize, window: WindowPair) -> Option<f64> {
        if window.n1() < -self.m || window.n2() > self.m {
            return None;
        }
        let a = (window.n1() + self.m) as usize;
        let b = (window.n2() + self.m) as usize;
        Some(self.terms[i][a..=b].iter().sum())
    }

    /// The field of a smaller truncation level, read off the stored layer terms.
    pub fn restrict(&self, m: i32) -> Option<TransformField> {
        if m < 1 || m > self.m {
            return None;
        }
        let off = (self.m - m) as usize;
        let terms: Vec<Vec<f64>> = self.terms.iter().map(|t| t[off..t.len() - off].to_vec()).collect();
        Some(TransformField {
            grid: self.grid,
            m,
            tstar: terms.iter().map(|t| sup_over_windows(t)).collect(),
            full: terms.iter().map(|t| t.iter().sum()).collect(),
            terms,
        })
    }

    pub fn csv_tstar(&self) -> String {
        let mut s = String::from("t,Tstar\n");
        for (i, v) in self.tstar.iter().enumerate() {
            writeln!(s, "{},{}", self.grid.point(i), v).unwrap();
        }
        s
    }

    pub fn csv_windows(&self, windows: &[WindowPair]) -> String {
        let mut s = String::from("t,N1,N2,value\n");
        for i in 0..self.grid.count() {
            for w in windows {
                if let Some(v) = self.window_value(i, *w) {
                    writeln!(s, "{},{},{},{}", self.grid.point(i), w.n1(), w.n2(), v).unwrap();
                }
            }
        }
        s
    }
}

fn map_points<T: Send>(
    n: usize,
    f: impl Fn(usize) -> Result<T, TransformError> + Sync + Send,
) -> Result<Vec<T>, TransformError> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// T*_M f on a grid. The layer differences are computed once per point and shared by all
/// O(M²) windows through prefix sums.
pub fn maximal_truncated(
    f: &TestFunction,
    spec: &LacunarySpec,
    alpha: f64,
    m: i32,
    grid: &Grid,
    opts: &TransformOptions,
) -> Result<TransformField, TransformError> {
    if spec.j_min() > -m || spec.j_max() < m + 1 {
        return Err(TransformError::SpecTooShort { lo: -m, hi: m + 1 });
    }
    let terms = map_points(grid.count(), |i| {
        let d = layer_differences(f, spec, alpha, -m, m, grid.point(i), opts)?;
        Ok((-m..=m).zip(d).map(|(j, dj)| spec.v(j) * dj).collect::<Vec<f64>>())
    })?;
    let tstar = terms.iter().map(|t| sup_over_windows(t)).collect();
    let full = terms.iter().map(|t| t.iter().sum()).collect();
    Ok(TransformField {
        grid: *grid,
        m,
        terms,
        tstar,
        full,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CotlarReport {
    /// max over admissible points of T*_M f / (M⁻(T_{(−M,M)} f) + M⁻_q f)
    pub constant: f64,
    pub argmax_t: f64,
    pub admissible: usize,
    pub excluded: usize,
}

pub const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Empirical constant of T*_M f <= C (M⁻(T_{(−M,M)} f) + M⁻_q f) on a grid. Points with a
/// denominator below 1e−12 are excluded and counted.
pub fn cotlar_ratio(
    f: &TestFunction,
    spec: &LacunarySpec,
    alpha: f64,
    q: f64,
    m: i32,
    grid: &Grid,
    opts: &TransformOptions,
) -> Result<CotlarReport, TransformError> {
    let field = maximal_truncated(f, spec, alpha, m, grid, opts)?;
    cotlar_from_field(&field, &f.sample(grid), q)
}

/// Cotlar constant from an existing field and samples of f on the same grid.
pub fn cotlar_from_field(field: &TransformField, f_values: &[f64], q: f64) -> Result<CotlarReport, TransformError> {
    let grid = &field.grid;
    let eps = eps_grid(grid.step(), grid.hi() - grid.lo());
    let mt = m_minus_field(&field.full, grid.step(), &eps);
    let mq = m_minus_q_field(f_values, q, grid.step(), &eps)?;
    let mut out = CotlarReport {
        constant: 0.0,
        argmax_t: f64::NAN,
        admissible: 0,
        excluded: 0,
    };
    for i in 0..grid.count() {
        let den = mt[i] + mq[i];
        if den < DENOMINATOR_FLOOR {
            out.excluded += 1;
            continue;
        }
        out.admissible += 1;
        let r = field.tstar[i] / den;
        if r > out.constant {
            out.constant = r;
            out.argmax_t = grid.point(i);
        }
    }
    if 2 * out.excluded > grid.count() {
        return Err(TransformError::DegenerateDenominator {
            excluded: out.excluded,
            total: grid.count(),
        });
    }
    Ok(out)
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

    fn bump() -> TestFunction {
        TestFunction::SmoothBump {
            center: 0.0,
            halfwidth: 1.0,
        }
    }

    #[test]
    fn window_sup_matches_brute_force() {
        let terms = [0.3, -1.2, 0.7, 0.05, -0.4, 2.0, -0.9];
        let mut brute = 0.0f64;
        for a in 0..terms.len() {
            for b in a + 1..terms.len() {
                brute = brute.max(terms[a..=b].iter().sum::<f64>().abs());
            }
        }
        assert!((sup_over_windows(&terms) - brute).abs() < 1e-15);
        assert_eq!(sup_over_windows(&[5.0]), 0.0);
    }

    #[test]
    fn constant_is_annihilated() {
        let spec = LacunarySpec::geometric(2.0, -4, 5, alt).unwrap();
        let w = WindowPair::new(-3, 3).unwrap();
        let opts = TransformOptions::quadrature_only(QuadConfig::default());
        for path in [Path::PoissonDiff, Path::KernelConv] {
            let v = transform_apply(&TestFunction::Constant(1.0), &spec, 0.5, w, 0.3, path, &opts).unwrap();
            assert!(v.abs() < 1e-8, "{path:?}: {v}");
        }
    }

    #[test]
    fn paths_agree_on_bump() {
        let spec = LacunarySpec::geometric(2.0, -6, 7, alt).unwrap();
        let opts = TransformOptions::quadrature_only(QuadConfig::default().with_tolerances(1e-11, 1e-14));
        for (n1, n2, t) in [(-3, 2, 0.0), (-6, 6, 0.5), (0, 3, 1.5), (-5, -2, -0.4)] {
            let w = WindowPair::new(n1, n2).unwrap();
            let a = transform_apply(&bump(), &spec, 0.4, w, t, Path::PoissonDiff, &opts).unwrap();
            let b = transform_apply(&bump(), &spec, 0.4, w, t, Path::KernelConv, &opts).unwrap();
            assert!((a - b).abs() < 1e-7, "{n1} {n2} {t}: {a} vs {b}");
        }
    }

    #[test]
    fn field_dominates_and_grows_with_m() {
        let spec = LacunarySpec::geometric(2.0, -9, 10, alt).unwrap();
        let grid = Grid::from_range(-1.5, 2.0, 0.25).unwrap();
        let opts = TransformOptions::default();
        let mut prev: Option<Vec<f64>> = None;
        for m in [2, 4, 8] {
            let fld = maximal_truncated(&bump(), &spec, 0.5, m, &grid, &opts).unwrap();
            for i in 0..grid.count() {
                assert!(fld.tstar[i] >= fld.full[i].abs() - 1e-15);
            }
            if let Some(p) = prev {
                for i in 0..grid.count() {
                    assert!(fld.tstar[i] >= p[i] - 1e-12);
                }
            }
            prev = Some(fld.tstar.clone());
        }
        assert!(maximal_truncated(&bump(), &spec, 0.5, 10, &grid, &opts).is_err());
    }

    #[test]
    fn restriction_matches_direct_field() {
        let spec = LacunarySpec::geometric(2.0, -6, 7, alt).unwrap();
        let grid = Grid::from_range(-1.0, 2.0, 0.5).unwrap();
        let f = TestFunction::Indicator { lo: -0.5, hi: 1.0 };
        let opts = TransformOptions::default();
        let big = maximal_truncated(&f, &spec, 0.5, 6, &grid, &opts).unwrap();
        let small = maximal_truncated(&f, &spec, 0.5, 3, &grid, &opts).unwrap();
        assert_eq!(big.restrict(3).unwrap(), small);
        assert!(big.restrict(7).is_none());
    }

    #[test]
    fn cotlar_constant_zero_is_degenerate() {
        let spec = LacunarySpec::geometric(2.0, -3, 4, alt).unwrap();
        let grid = Grid::from_range(-1.0, 1.0, 0.25).unwrap();
        let r = cotlar_ratio(&TestFunction::Constant(0.0), &spec, 0.5, 2.0, 3, &grid, &TransformOptions::default());
        assert!(matches!(r, Err(TransformError::DegenerateDenominator { .. })));
    }

    #[test]
    fn csv_headers() {
        let spec = LacunarySpec::geometric(2.0, -2, 3, alt).unwrap();
        let grid = Grid::from_range(0.0, 1.0, 0.5).unwrap();
        let fld = maximal_truncated(&TestFunction::Indicator { lo: -1.0, hi: 0.5 }, &spec, 0.5, 2, &grid, &TransformOptions::default()).unwrap();
        let c = fld.csv_tstar();
        assert!(c.starts_with("t,Tstar\n"));
        assert_eq!(c.lines().count(), 4);
        let w = fld.csv_windows(&[WindowPair::new(-1, 1).unwrap(), WindowPair::new(-2, 5).unwrap()]);
        assert!(w.starts_with("t,N1,N2,value\n"));
        assert_eq!(w.lines().count(), 4);
    }
}
