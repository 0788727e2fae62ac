//! One-sided Hardy–Littlewood maximal operators on a grid and checkers for the lateral
//! weight classes A_1^- and A_p^-.
//!
//! Grid values are read as cell averages: values[i] lives on [t_i, t_{i+1}). A radius ε
//! becomes k = round(ε/step) whole cells, so M⁻ at t_i averages cells i−k..i−1 and M⁺
//! averages cells i..i+k−1.

use thiserror::Error;

use crate::funcspace::Grid;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaximalError {
    #[error("weight must be positive and finite on the grid (index {0})")]
    NonPositiveWeight(usize),
    #[error("array length {got} does not match grid size {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("exponent must exceed 1, got {0}")]
    InvalidExponent(f64),
}

/// A positive weight sampled at the points of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSample {
    grid: Grid,
    w: Vec<f64>,
}

impl WeightSample {
    pub fn new(grid: Grid, w: Vec<f64>) -> Result<Self, MaximalError> {
        if w.len() != grid.count() {
            return Err(MaximalError::LengthMismatch {
                got: w.len(),
                want: grid.count(),
            });
        }
        if let Some(i) = w.iter().position(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(MaximalError::NonPositiveWeight(i));
        }
        Ok(WeightSample { grid, w })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self, MaximalError> {
        WeightSample::new(grid, grid.points().into_iter().map(f).collect())
    }

    pub fn unit(grid: Grid) -> Self {
        WeightSample {
            grid,
            w: vec![1.0; grid.count()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }
}

/// Named weights used by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Unit,
    ExpDecay,
    ExpGrowth,
}

impl WeightKind {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            WeightKind::Unit => 1.0,
            WeightKind::ExpDecay => (-t).exp(),
            WeightKind::ExpGrowth => t.exp(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WeightKind::Unit => "one",
            WeightKind::ExpDecay => "exp(-t)",
            WeightKind::ExpGrowth => "exp(t)",
        }
    }

    pub fn sample(self, grid: Grid) -> Result<WeightSample, MaximalError> {
        WeightSample::from_fn(grid, |t| self.eval(t))
    }
}

/// Geometric radii with ratio 2^{1/4}, from one step up to `span`.
pub fn eps_grid(step: f64, span: f64) -> Vec<f64> {
    let ratio = 2f64.powf(0.25);
    let mut out = Vec::new();
    let mut e = step;
    while e <= span * (1.0 + 1e-12) {
        out.push(e);
        e *= ratio;
    }
    out
}

/// Distinct cell counts for the radii, each at least 1.
fn cell_counts(eps: &[f64], step: f64) -> Vec<usize> {
    let mut ks: Vec<usize> = eps.iter().map(|e| ((e / step).round() as usize).max(1)).collect();
    ks.sort_unstable();
    ks.dedup();
    ks
}

fn prefix(values: &[f64], power: f64) -> Vec<f64> {
    let mut s = Vec::with_capacity(values.len() + 1);
    let mut acc = 0.0;
    s.push(0.0);
    for v in values {
        acc += if power == 1.0 { v.abs() } else { v.abs().powf(power) };
        s.push(acc);
    }
    s
}

/// M⁻ at one index: max over radii of the mean of |f| over the k cells ending at t.
pub fn m_minus(values: &[f64], step: f64, t_index: usize, eps: &[f64]) -> f64 {
    let s = prefix(values, 1.0);
    m_minus_from_prefix(&s, step, t_index, &cell_counts(eps, step))
}

fn m_minus_from_prefix(s: &[f64], _step: f64, idx: usize, ks: &[usize]) -> f64 {
    let mut best = 0.0f64;
    // cells idx−k+1..=idx, so that the point itself is always included
    for &k in ks {
        if k > idx + 1 {
            break;
        }
        best = best.max((s[idx + 1] - s[idx + 1 - k]) / k as f64);
    }
    best
}

fn m_plus_from_prefix(s: &[f64], idx: usize, ks: &[usize]) -> f64 {
    // cells idx..idx+k−1 must exist; there are len−1 cells
    let cells = s.len() - 2;
    let mut best = 0.0f64;
    for &k in ks {
        if idx + k > cells {
            break;
        }
        best = best.max((s[idx + k] - s[idx]) / k as f64);
    }
    best
}

/// M⁺ at one index: max over radii of the mean of |f| over the k cells starting at t.
pub fn m_plus(values: &[f64], step: f64, t_index: usize, eps: &[f64]) -> f64 {
    let s = prefix(values, 1.0);
    m_plus_from_prefix(&s, t_index, &cell_counts(eps, step))
}

/// M⁻_q at one index: max over radii of the q-power mean of |f|.
pub fn m_minus_q(values: &[f64], q: f64, step: f64, t_index: usize, eps: &[f64]) -> Result<f64, MaximalError> {
    if !(q > 1.0) {
        return Err(MaximalError::InvalidExponent(q));
    }
    let s = prefix(values, q);
    Ok(m_minus_from_prefix(&s, step, t_index, &cell_counts(eps, step)).powf(1.0 / q))
}

/// M⁻ at every grid index.
pub fn m_minus_field(values: &[f64], step: f64, eps: &[f64]) -> Vec<f64> {
    let s = prefix(values, 1.0);
    let ks = cell_counts(eps, step);
    (0..values.len()).map(|i| m_minus_from_prefix(&s, step, i, &ks)).collect()
}

/// M⁺ at every grid index.
pub fn m_plus_field(values: &[f64], step: f64, eps: &[f64]) -> Vec<f64> {
    let s = prefix(values, 1.0);
    let ks = cell_counts(eps, step);
    (0..values.len()).map(|i| m_plus_from_prefix(&s, i, &ks)).collect()
}

/// M⁻_q at every grid index.
pub fn m_minus_q_field(values: &[f64], q: f64, step: f64, eps: &[f64]) -> Result<Vec<f64>, MaximalError> {
    if !(q > 1.0) {
        return Err(MaximalError::InvalidExponent(q));
    }
    let s = prefix(values, q);
    let ks = cell_counts(eps, step);
    Ok((0..values.len())
        .map(|i| m_minus_from_prefix(&s, step, i, &ks).powf(1.0 / q))
        .collect())
}

/// Outcome of a weight-class check: the constant on the full radius range, the constant
/// on half of it, and whether the two agree within 5%.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightCheck {
    pub constant: f64,
    pub constant_half_range: f64,
    pub pass: bool,
}

const STABILITY: f64 = 0.05;

fn stable(full: f64, half: f64) -> bool {
    full.is_finite() && half.is_finite() && half > 0.0 && (full - half).abs() <= STABILITY * half
}

fn a1_constant(w: &WeightSample, eps: &[f64]) -> f64 {
    let step = w.grid().step();
    let vals = w.values();
    let mp = m_plus_field(vals, step, eps);
    let cells = vals.len() - 1;
    (0..cells).map(|i| mp[i] / vals[i]).fold(0.0, f64::max)
}

/// A_1^- check: C = max_t M⁺w(t)/w(t). A finite constant must not move by more than 5% when
/// the radius range is doubled; a weight outside the class keeps growing with the range.
pub fn check_a1_minus(w: &WeightSample, eps: &[f64]) -> WeightCheck {
    let max_e = eps.iter().copied().fold(0.0, f64::max);
    let half: Vec<f64> = eps.iter().copied().filter(|e| *e <= 0.5 * max_e).collect();
    let constant = a1_constant(w, eps);
    let constant_half_range = a1_constant(w, &half);
    WeightCheck {
        constant,
        constant_half_range,
        pass: stable(constant, constant_half_range),
    }
}

fn ap_constant(w: &WeightSample, p: f64, max_gap: usize, budget: usize) -> f64 {
    let pp = p / (p - 1.0);
    let step = w.grid().step();
    let vals = w.values();
    let cells = vals.len() - 1;
    let mut dual = Vec::with_capacity(cells + 1);
    let mut direct = Vec::with_capacity(cells + 1);
    let (mut sd, mut sw) = (0.0, 0.0);
    dual.push(0.0);
    direct.push(0.0);
    for &x in &vals[..cells] {
        sd += x.powf(1.0 - pp);
        sw += x;
        dual.push(sd);
        direct.push(sw);
    }
    let mut gaps = Vec::new();
    let mut g = 1usize;
    while g <= max_gap {
        gaps.push(g);
        g *= 2;
    }
    let pairs = (gaps.len() * gaps.len()).max(1);
    let stride = (cells * pairs / budget.max(1)).max(1);
    let mut best = 0.0f64;
    for &g1 in &gaps {
        for &g2 in &gaps {
            let mut b = g1;
            while b + g2 <= cells {
                let a = b - g1;
                let c = b + g2;
                let left = ((dual[b] - dual[a]) * step).powf(1.0 / pp);
                let right = ((direct[c] - direct[b]) * step).powf(1.0 / p);
                best = best.max(left * right / ((c - a) as f64 * step));
                b += stride;
            }
        }
    }
    best
}

/// A_p^- check over triples a < b < c of grid points with power-of-two gaps b − a and c − b;
/// `triple_budget` caps the number of triples by striding over b. Pass criterion as for A_1^-:
/// the constant with gaps up to the full span agrees within 5% with gaps up to half of it.
pub fn check_ap_minus(w: &WeightSample, p: f64, triple_budget: usize) -> Result<WeightCheck, MaximalError> {
    if !(p > 1.0) {
        return Err(MaximalError::InvalidExponent(p));
    }
    let cells = w.values().len() - 1;
    let constant = ap_constant(w, p, cells / 2, triple_budget);
    let constant_half_range = ap_constant(w, p, cells / 4, triple_budget);
    Ok(WeightCheck {
        constant,
        constant_half_range,
        pass: stable(constant, constant_half_range),
    })
}
