//! Test functions on the line, uniform grids, and grid norms (weighted L^p, weak L^1, BMO).

use thiserror::Error;

use crate::maximal::WeightSample;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuncError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("exponent p = {0} must be at least 1")]
    InvalidExponent(f64),
    #[error("thresholds must be positive and increasing")]
    InvalidThresholds,
    #[error("array length {got} does not match grid size {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("invalid test function: {0}")]
    InvalidFunction(String),
}

/// Uniform grid t_i = lo + i·step, i = 0..count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    lo: f64,
    step: f64,
    count: usize,
}

impl Grid {
    pub fn new(lo: f64, step: f64, count: usize) -> Result<Self, FuncError> {
        if !(step > 0.0 && step.is_finite() && lo.is_finite()) {
            return Err(FuncError::InvalidGrid(format!("lo {lo}, step {step}")));
        }
        if count < 2 {
            return Err(FuncError::InvalidGrid("need at least two points".into()));
        }
        Ok(Grid { lo, step, count })
    }

    /// Grid from its end points; (hi − lo)/step must be an integer up to rounding.
    pub fn from_range(lo: f64, hi: f64, step: f64) -> Result<Self, FuncError> {
        if !(hi > lo) || !(step > 0.0) {
            return Err(FuncError::InvalidGrid(format!("[{lo}, {hi}] step {step}")));
        }
        let cells = (hi - lo) / step;
        let n = cells.round();
        if (cells - n).abs() > 1e-6 * n.max(1.0) {
            return Err(FuncError::InvalidGrid(format!(
                "[{lo}, {hi}] is not a whole number of steps of {step}"
            )));
        }
        Grid::new(lo, step, n as usize + 1)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }
    pub fn hi(&self) -> f64 {
        self.point(self.count - 1)
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn count(&self) -> usize {
        self.count
    }
    pub fn point(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }
    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }
    /// Same span with half the step.
    pub fn refined(&self) -> Grid {
        Grid {
            lo: self.lo,
            step: self.step / 2.0,
            count: 2 * self.count - 1,
        }
    }
    /// Index of the point nearest to t, clamped to the grid.
    pub fn nearest_index(&self, t: f64) -> usize {
        let i = ((t - self.lo) / self.step).round();
        i.clamp(0.0, (self.count - 1) as f64) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    /// 1 on [lo, hi), 0 elsewhere.
    Indicator { lo: f64, hi: f64 },
    /// exp(1 − 1/(1 − y²)) with y = (t − center)/halfwidth, zero for |y| ≥ 1.
    SmoothBump { center: f64, halfwidth: f64 },
    Constant(f64),
    /// Σ_{k∈ℤ} (−1)^k on (−a^{2k+1}, −a^{2k}].
    AlternatingShellsBothSided { a: f64 },
    /// Σ_{k≤0} (−1)^k on (−a^{2k}, −a^{2k−1}].
    AlternatingShellsUnit { a: f64 },
    /// Piecewise constant: values[i] on [t_i, t_{i+1}), zero outside [lo, hi].
    GridSampled { grid: Grid, values: Vec<f64> },
}

/// Index n with a^n <= x < a^{n+1}, for x > 0.
fn shell_index(x: f64, a: f64) -> i32 {
    let mut n = (x.ln() / a.ln()).floor() as i32;
    while a.powi(n) > x {
        n -= 1;
    }
    while a.powi(n + 1) <= x {
        n += 1;
    }
    n
}

impl TestFunction {
    pub fn validate(&self) -> Result<(), FuncError> {
        let bad = |m: &str| Err(FuncError::InvalidFunction(m.to_string()));
        match self {
            TestFunction::Indicator { lo, hi } if !(lo < hi) => bad("indicator needs lo < hi"),
            TestFunction::SmoothBump { halfwidth, .. } if !(*halfwidth > 0.0) => bad("bump needs halfwidth > 0"),
            TestFunction::AlternatingShellsBothSided { a } | TestFunction::AlternatingShellsUnit { a }
                if !(*a > 1.0 && a.is_finite()) =>
            {
                bad("shell base must exceed 1")
            }
            TestFunction::GridSampled { grid, values } if values.len() != grid.count() => {
                Err(FuncError::LengthMismatch {
                    got: values.len(),
                    want: grid.count(),
                })
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TestFunction::Indicator { lo, hi } => {
                if t >= *lo && t < *hi {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::SmoothBump { center, halfwidth } => {
                let y = (t - center) / halfwidth;
                let q = 1.0 - y * y;
                if q <= 0.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / q).exp()
                }
            }
            TestFunction::Constant(c) => *c,
            TestFunction::AlternatingShellsBothSided { a } => {
                if t >= 0.0 {
                    return 0.0;
                }
                // s ∈ (−a^{2k+1}, −a^{2k}]  ⇔  a^{2k} <= −s < a^{2k+1}
                let n = shell_index(-t, *a);
                if n.rem_euclid(2) == 0 {
                    if (n / 2).rem_euclid(2) == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    0.0
                }
            }
            TestFunction::AlternatingShellsUnit { a } => {
                if t >= 0.0 {
                    return 0.0;
                }
                // s ∈ (−a^{2k}, −a^{2k−1}]  ⇔  a^{2k−1} <= −s < a^{2k}, k <= 0
                let n = shell_index(-t, *a);
                if n.rem_euclid(2) == 1 && n <= -1 {
                    let k = (n + 1) / 2;
                    if k.rem_euclid(2) == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                } else {
                    0.0
                }
            }
            TestFunction::GridSampled { grid, values } => {
                if t < grid.lo() || t > grid.hi() {
                    return 0.0;
                }
                let i = ((t - grid.lo()) / grid.step()).floor() as usize;
                values[i.min(grid.count() - 1)]
            }
        }
    }

    /// Closed interval outside of which the function vanishes (infinite ends allowed).
    pub fn support(&self) -> (f64, f64) {
        match self {
            TestFunction::Indicator { lo, hi } => (*lo, *hi),
            TestFunction::SmoothBump { center, halfwidth } => (center - halfwidth, center + halfwidth),
            TestFunction::Constant(c) => {
                if *c == 0.0 {
                    (0.0, 0.0)
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
            TestFunction::AlternatingShellsBothSided { .. } => (f64::NEG_INFINITY, 0.0),
            TestFunction::AlternatingShellsUnit { .. } => (-1.0, 0.0),
            TestFunction::GridSampled { grid, .. } => (grid.lo(), grid.hi()),
        }
    }

    /// sup |f| over the whole line.
    pub fn sup_norm(&self) -> f64 {
        match self {
            TestFunction::Constant(c) => c.abs(),
            TestFunction::GridSampled { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
            _ => 1.0,
        }
    }

    /// True for the variants that are smooth everywhere.
    pub fn is_smooth(&self) -> bool {
        matches!(self, TestFunction::SmoothBump { .. } | TestFunction::Constant(_))
    }

    /// Jump locations inside the open interval (lo, hi), both ends finite, in increasing order.
    /// For the shell functions only the jumps with |x| >= `min_abs` are listed, which keeps
    /// the list finite near their accumulation point at 0.
    pub fn jumps_in(&self, lo: f64, hi: f64, min_abs: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if !(hi > lo) {
            return out;
        }
        let mut push = |x: f64| {
            if x > lo && x < hi {
                out.push(x);
            }
        };
        match self {
            TestFunction::Indicator { lo: a, hi: b } => {
                push(*a);
                push(*b);
            }
            TestFunction::SmoothBump { .. } | TestFunction::Constant(_) => {}
            TestFunction::AlternatingShellsBothSided { a } | TestFunction::AlternatingShellsUnit { a } => {
                let unit = matches!(self, TestFunction::AlternatingShellsUnit { .. });
                let top = (-lo).min(if unit { 1.0 } else { f64::INFINITY });
                let bottom = (-hi).max(min_abs).max(f64::MIN_POSITIVE);
                if top > 0.0 && top > bottom {
                    let n_lo = shell_index(bottom, *a);
                    let n_hi = shell_index(top, *a) + 1;
                    let mut n = n_hi;
                    while n >= n_lo {
                        let x = a.powi(n);
                        if (!unit || n <= 0) && x >= min_abs {
                            push(-x);
                        }
                        n -= 1;
                    }
                }
            }
            TestFunction::GridSampled { grid, values } => {
                let mut prev = 0.0;
                for (i, &v) in values.iter().enumerate().take(grid.count() - 1) {
                    if v != prev {
                        push(grid.point(i));
                    }
                    prev = v;
                }
                if prev != 0.0 {
                    push(grid.hi());
                }
            }
        }
        out
    }

    /// Pieces (x_lo, x_hi, value) on which the function is constant, covering the part of the
    /// support inside [lo, hi]; None for the smooth bump. Shell pieces with |x| < `min_abs` are
    /// dropped.
    pub fn constant_pieces(&self, lo: f64, hi: f64, min_abs: f64) -> Option<Vec<(f64, f64, f64)>> {
        if matches!(self, TestFunction::SmoothBump { .. }) {
            return None;
        }
        let (slo, shi) = self.support();
        let a = lo.max(slo);
        let b = hi.min(shi);
        if !(b > a) {
            return Some(Vec::new());
        }
        let mut nodes = vec![a];
        if matches!(
            self,
            TestFunction::AlternatingShellsBothSided { .. } | TestFunction::AlternatingShellsUnit { .. }
        ) && b > -min_abs
        {
            // stop at the accumulation cut-off
            let cut = -min_abs;
            let mut inner = self.jumps_in(a, cut.max(a), min_abs);
            nodes.append(&mut inner);
            if cut > a {
                nodes.push(cut);
            }
        } else {
            nodes.extend(self.jumps_in(a, b, min_abs));
            nodes.push(b);
        }
        let mut out = Vec::with_capacity(nodes.len());
        for w in nodes.windows(2) {
            if w[1] > w[0] {
                let v = self.eval(0.5 * (w[0] + w[1]));
                if v != 0.0 {
                    out.push((w[0], w[1], v));
                }
            }
        }
        Some(out)
    }

    /// (f, f', f'') at t for the smooth variants.
    pub fn derivatives(&self, t: f64) -> Option<(f64, f64, f64)> {
        match self {
            TestFunction::Constant(c) => Some((*c, 0.0, 0.0)),
            TestFunction::SmoothBump { center, halfwidth } => {
                let h = *halfwidth;
                let y = (t - center) / h;
                let q = 1.0 - y * y;
                if q <= 0.0 {
                    return Some((0.0, 0.0, 0.0));
                }
                let phi = (1.0 - 1.0 / q).exp();
                let d1 = -2.0 * y * phi / (q * q);
                let d2 = phi * (4.0 * y * y / q.powi(4) - 2.0 / (q * q) - 8.0 * y * y / q.powi(3));
                Some((phi, d1 / h, d2 / (h * h)))
            }
            _ => None,
        }
    }

    /// Samples at the grid points.
    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.count()).map(|i| self.eval(grid.point(i))).collect()
    }

    pub fn sup_norm_on(&self, grid: &Grid) -> f64 {
        self.sample(grid).iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    LpWeighted { p: f64 },
    WeakL1Weighted { lambdas: Vec<f64> },
    Bmo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub kind: NormKind,
    pub value: f64,
    pub grid: Grid,
}

fn check_len(got: usize, grid: &Grid) -> Result<(), FuncError> {
    if got != grid.count() {
        return Err(FuncError::LengthMismatch {
            got,
            want: grid.count(),
        });
    }
    Ok(())
}

/// (Σ_i |f_i|^p w_i step)^{1/p} over the cells [t_i, t_{i+1}) of the weight's grid.
pub fn lp_weighted_norm_values(values: &[f64], p: f64, w: &WeightSample) -> Result<f64, FuncError> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(FuncError::InvalidExponent(p));
    }
    let grid = w.grid();
    check_len(values.len(), grid)?;
    let n = grid.count() - 1;
    let scale = values[..n].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = values[..n]
        .iter()
        .zip(w.values())
        .map(|(v, wi)| (v.abs() / scale).powf(p) * wi)
        .sum();
    Ok(scale * (sum * grid.step()).powf(1.0 / p))
}

pub fn lp_weighted_norm(f: &TestFunction, p: f64, w: &WeightSample, grid: &Grid) -> Result<NormReport, FuncError> {
    if grid != w.grid() {
        return Err(FuncError::InvalidGrid("weight is sampled on a different grid".into()));
    }
    let value = lp_weighted_norm_values(&f.sample(grid), p, w)?;
    Ok(NormReport {
        kind: NormKind::LpWeighted { p },
        value,
        grid: *grid,
    })
}

/// For each λ, the weighted measure Σ w_i step over cells with |f_i| > λ.
pub fn weak_l1_profile(values: &[f64], w: &WeightSample, lambdas: &[f64]) -> Result<Vec<(f64, f64)>, FuncError> {
    if lambdas.iter().any(|l| !(*l > 0.0)) || lambdas.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(FuncError::InvalidThresholds);
    }
    let grid = w.grid();
    check_len(values.len(), grid)?;
    let n = grid.count() - 1;
    let step = grid.step();
    Ok(lambdas
        .iter()
        .map(|&l| {
            let m: f64 = values[..n]
                .iter()
                .zip(w.values())
                .filter(|(v, _)| v.abs() > l)
                .map(|(_, wi)| wi * step)
                .sum();
            (l, m)
        })
        .collect())
}

/// Max over dyadic-length windows of cells (lengths 2, 4, 8, …; start offsets at multiples of
/// half the length) of the mean oscillation (1/|B|)∫_B |f − f_B|.
pub fn bmo_seminorm(values: &[f64]) -> f64 {
    let data = if values.len() >= 2 { &values[..values.len() - 1] } else { values };
    let n = data.len();
    let mut best = 0.0f64;
    let mut len = 2usize;
    while len <= n {
        let stride = len / 2;
        let mut start = 0usize;
        while start + len <= n {
            let win = &data[start..start + len];
            let mean = win.iter().sum::<f64>() / len as f64;
            let osc = win.iter().map(|v| (v - mean).abs()).sum::<f64>() / len as f64;
            best = best.max(osc);
            start += stride;
        }
        // also the window flush with the right end
        if n % stride != 0 {
            let win = &data[n - len..];
            let mean = win.iter().sum::<f64>() / len as f64;
            let osc = win.iter().map(|v| (v - mean).abs()).sum::<f64>() / len as f64;
            best = best.max(osc);
        }
        len *= 2;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shells_both_sided_values() {
        let f = TestFunction::AlternatingShellsBothSided { a: 3.0 };
        assert_eq!(f.eval(-1.0), 1.0);
        assert_eq!(f.eval(-2.0), 1.0);
        assert_eq!(f.eval(-3.0), 0.0);
        assert_eq!(f.eval(-9.0), -1.0);
        assert_eq!(f.eval(-1.0 / 9.0), -1.0);
        assert_eq!(f.eval(-0.5), 0.0);
        assert_eq!(f.eval(5.0), 0.0);
    }

    #[test]
    fn shells_unit_values() {
        let f = TestFunction::AlternatingShellsUnit { a: 2.0 };
        // k = 0: (−1, −1/2]
        assert_eq!(f.eval(-0.75), 1.0);
        assert_eq!(f.eval(-0.5), 1.0);
        assert_eq!(f.eval(-1.0), 0.0);
        // k = −1: (−1/4, −1/8]
        assert_eq!(f.eval(-0.2), -1.0);
        assert_eq!(f.eval(-0.3), 0.0);
        assert_eq!(f.eval(-2.0), 0.0);
    }

    #[test]
    fn bump_and_derivatives() {
        let f = TestFunction::SmoothBump {
            center: 1.0,
            halfwidth: 2.0,
        };
        assert_eq!(f.eval(1.0), 1.0);
        assert_eq!(f.eval(3.0), 0.0);
        let t = 1.7;
        let h = 1e-5;
        let (_, d1, d2) = f.derivatives(t).unwrap();
        let fd1 = (f.eval(t + h) - f.eval(t - h)) / (2.0 * h);
        let fd2 = (f.eval(t + h) - 2.0 * f.eval(t) + f.eval(t - h)) / (h * h);
        assert!((d1 - fd1).abs() < 1e-8);
        assert!((d2 - fd2).abs() < 1e-4);
    }

    #[test]
    fn grid_sampled_is_left_closed() {
        let grid = Grid::new(0.0, 1.0, 3).unwrap();
        let f = TestFunction::GridSampled {
            grid,
            values: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(f.eval(0.0), 1.0);
        assert_eq!(f.eval(0.999), 1.0);
        assert_eq!(f.eval(1.0), 2.0);
        assert_eq!(f.eval(2.5), 0.0);
        assert_eq!(f.eval(-0.1), 0.0);
        assert_eq!(f.jumps_in(-1.0, 3.0, 0.0), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn shell_jumps_are_powers() {
        let f = TestFunction::AlternatingShellsUnit { a: 2.0 };
        let j = f.jumps_in(-10.0, 0.0, 0.1);
        assert_eq!(j, vec![-1.0, -0.5, -0.25, -0.125]);
        let pieces = f.constant_pieces(-10.0, 10.0, 0.1).unwrap();
        assert_eq!(pieces[0], (-1.0, -0.5, 1.0));
        assert_eq!(pieces[1], (-0.25, -0.125, -1.0));
    }

    #[test]
    fn grid_construction() {
        let g = Grid::from_range(-2.0, 2.0, 0.5).unwrap();
        assert_eq!(g.count(), 9);
        assert_eq!(g.hi(), 2.0);
        assert!(Grid::from_range(0.0, 1.0, 0.3).is_err());
        assert_eq!(g.refined().count(), 17);
        assert_eq!(g.nearest_index(0.26), 5);
    }

    #[test]
    fn lp_examples() {
        let grid = Grid::from_range(0.0, 1.0, 1e-3).unwrap();
        let w = WeightSample::unit(grid);
        let r = lp_weighted_norm(&TestFunction::Constant(1.0), 2.0, &w, &grid).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);

        let grid = Grid::from_range(-2.0, 2.0, 1.0 / 1024.0).unwrap();
        let w = WeightSample::unit(grid);
        let ind = TestFunction::Indicator { lo: 0.0, hi: 1.0 };
        let r = lp_weighted_norm(&ind, 2.0, &w, &grid).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);

        let grid = Grid::from_range(-2.0, 2.0, 1e-5).unwrap();
        let w = WeightSample::from_fn(grid, |t| (-t).exp()).unwrap();
        let r = lp_weighted_norm(&ind, 1.0, &w, &grid).unwrap();
        assert!((r.value - (1.0 - (-1.0f64).exp())).abs() < 1e-5);
        assert!(lp_weighted_norm(&ind, 0.5, &w, &grid).is_err());
    }

    #[test]
    fn weak_profile_examples() {
        let grid = Grid::from_range(-2.0, 2.0, 1.0 / 1024.0).unwrap();
        let w = WeightSample::unit(grid);
        let ind = TestFunction::Indicator { lo: 0.0, hi: 1.0 }.sample(&grid);
        let prof = weak_l1_profile(&ind, &w, &[0.5, 1.5]).unwrap();
        assert!((prof[0].1 - 1.0).abs() < 1e-12);
        assert_eq!(prof[1].1, 0.0);
        let tent: Vec<f64> = grid.points().iter().map(|t| (1.0 - t.abs()).max(0.0)).collect();
        let prof = weak_l1_profile(&tent, &w, &[0.5]).unwrap();
        assert!((prof[0].1 - 1.0).abs() < 3.0 / 1024.0);
        assert!(weak_l1_profile(&tent, &w, &[0.0]).is_err());
        assert!(weak_l1_profile(&tent, &w, &[0.5, 0.2]).is_err());
    }

    #[test]
    fn bmo_examples() {
        assert_eq!(bmo_seminorm(&[3.0; 17]), 0.0);
        let grid = Grid::from_range(-1.0, 1.0, 1.0 / 512.0).unwrap();
        let step = TestFunction::Indicator { lo: 0.0, hi: 10.0 }.sample(&grid);
        assert!((bmo_seminorm(&step) - 0.5).abs() < 1e-12);
        let alt: Vec<f64> = (0..257).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!((bmo_seminorm(&alt) - 1.0).abs() < 1e-12);
    }
}
