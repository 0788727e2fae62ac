//! Finite windows of ρ-lacunary sequences {a_j} with multipliers {v_j}, and the
//! normalization that inserts extra terms until every ratio lies in [ρ, ρ²].

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use thiserror::Error;

/// Relative slack on the lacunarity test, so that a^{j+1}/a^j computed by powi passes.
const RATIO_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LacunaryError {
    #[error("rho must exceed 1, got {0}")]
    InvalidRho(f64),
    #[error("sequence is empty")]
    Empty,
    #[error("a and v lengths differ ({a} vs {v})")]
    LengthMismatch { a: usize, v: usize },
    #[error("a_{j} = {value} is not positive and finite")]
    NonPositive { j: i32, value: f64 },
    #[error("v_{j} is not finite")]
    NonFiniteMultiplier { j: i32 },
    #[error("a_{next}/a_{j} = {ratio} is below rho", next = j + 1)]
    NotLacunary { j: i32, ratio: f64 },
    #[error("window ({n1}, {n2}) needs n1 < n2")]
    InvalidWindow { n1: i32, n2: i32 },
    #[error("index {j} outside the stored range [{lo}, {hi}]")]
    OutOfRange { j: i32, lo: i32, hi: i32 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// N = (N1, N2) with N1 < N2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WindowPair {
    n1: i32,
    n2: i32,
}

impl WindowPair {
    pub fn new(n1: i32, n2: i32) -> Result<Self, LacunaryError> {
        if n1 < n2 {
            Ok(WindowPair { n1, n2 })
        } else {
            Err(LacunaryError::InvalidWindow { n1, n2 })
        }
    }

    /// (−m, m)
    pub fn symmetric(m: i32) -> Result<Self, LacunaryError> {
        WindowPair::new(-m, m)
    }

    pub fn n1(&self) -> i32 {
        self.n1
    }
    pub fn n2(&self) -> i32 {
        self.n2
    }
    /// Number of layers N2 − N1 + 1.
    pub fn len(&self) -> usize {
        (self.n2 - self.n1 + 1) as usize
    }
    pub fn is_empty(&self) -> bool {
        false
    }
}

/// a_j and v_j for j in [j_min, j_min + len − 1].
#[derive(Debug, Clone, PartialEq)]
pub struct LacunarySpec {
    rho: f64,
    j_min: i32,
    a: Vec<f64>,
    v: Vec<f64>,
}

impl LacunarySpec {
    pub fn new(rho: f64, j_min: i32, a: Vec<f64>, v: Vec<f64>) -> Result<Self, LacunaryError> {
        if !(rho > 1.0 && rho.is_finite()) {
            return Err(LacunaryError::InvalidRho(rho));
        }
        if a.is_empty() {
            return Err(LacunaryError::Empty);
        }
        if a.len() != v.len() {
            return Err(LacunaryError::LengthMismatch { a: a.len(), v: v.len() });
        }
        for (i, (&x, &y)) in a.iter().zip(&v).enumerate() {
            let j = j_min + i as i32;
            if !(x > 0.0 && x.is_finite()) {
                return Err(LacunaryError::NonPositive { j, value: x });
            }
            if !y.is_finite() {
                return Err(LacunaryError::NonFiniteMultiplier { j });
            }
        }
        for (i, w) in a.windows(2).enumerate() {
            let ratio = w[1] / w[0];
            if ratio < rho * (1.0 - RATIO_SLACK) {
                return Err(LacunaryError::NotLacunary {
                    j: j_min + i as i32,
                    ratio,
                });
            }
        }
        Ok(LacunarySpec { rho, j_min, a, v })
    }

    /// a_j = base^j for j in [j_min, j_max], ρ = base.
    pub fn geometric(base: f64, j_min: i32, j_max: i32, v: impl Fn(i32) -> f64) -> Result<Self, LacunaryError> {
        if j_max < j_min {
            return Err(LacunaryError::Empty);
        }
        let a = (j_min..=j_max).map(|j| base.powi(j)).collect();
        let v = (j_min..=j_max).map(v).collect();
        LacunarySpec::new(base, j_min, a, v)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn j_min(&self) -> i32 {
        self.j_min
    }
    pub fn j_max(&self) -> i32 {
        self.j_min + self.a.len() as i32 - 1
    }
    pub fn a_values(&self) -> &[f64] {
        &self.a
    }
    pub fn v_values(&self) -> &[f64] {
        &self.v
    }

    fn offset(&self, j: i32) -> Option<usize> {
        if j < self.j_min || j > self.j_max() {
            None
        } else {
            Some((j - self.j_min) as usize)
        }
    }

    fn out_of_range(&self, j: i32) -> LacunaryError {
        LacunaryError::OutOfRange {
            j,
            lo: self.j_min,
            hi: self.j_max(),
        }
    }

    pub fn try_a(&self, j: i32) -> Result<f64, LacunaryError> {
        self.offset(j).map(|i| self.a[i]).ok_or_else(|| self.out_of_range(j))
    }

    pub fn try_v(&self, j: i32) -> Result<f64, LacunaryError> {
        self.offset(j).map(|i| self.v[i]).ok_or_else(|| self.out_of_range(j))
    }

    /// a_j; panics outside the stored range (use after `window_indices`).
    pub fn a(&self, j: i32) -> f64 {
        self.try_a(j).unwrap()
    }

    /// v_j; panics outside the stored range.
    pub fn v(&self, j: i32) -> f64 {
        self.try_v(j).unwrap()
    }

    pub fn v_sup(&self) -> f64 {
        self.v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Same sequence, multipliers replaced.
    pub fn with_multipliers(&self, v: impl Fn(i32) -> f64) -> LacunarySpec {
        LacunarySpec {
            v: (self.j_min..=self.j_max()).map(v).collect(),
            ..self.clone()
        }
    }

    /// Same sequence, multipliers scaled by c.
    pub fn scaled(&self, c: f64) -> LacunarySpec {
        LacunarySpec {
            v: self.v.iter().map(|x| c * x).collect(),
            ..self.clone()
        }
    }

    /// One line `# rho <value>` followed by `j a_j v_j` per index.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# rho {}", self.rho).unwrap();
        for (i, (a, v)) in self.a.iter().zip(&self.v).enumerate() {
            writeln!(s, "{} {} {}", self.j_min + i as i32, a, v).unwrap();
        }
        s
    }

    /// Parses `to_text` output. Blank lines and other `#` lines are ignored; indices must
    /// be consecutive. Without a rho header the smallest ratio is used.
    pub fn from_text(text: &str) -> Result<Self, LacunaryError> {
        let mut rho = None;
        let mut j_min = None;
        let mut a = Vec::new();
        let mut v = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let err = |msg: &str| LacunaryError::Parse {
                line,
                msg: msg.to_string(),
            };
            let l = raw.trim();
            if l.is_empty() {
                continue;
            }
            if let Some(rest) = l.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                if it.next() == Some("rho") {
                    let r = it.next().ok_or_else(|| err("missing rho value"))?;
                    rho = Some(r.parse::<f64>().map_err(|_| err("bad rho value"))?);
                }
                continue;
            }
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err("expected `j a_j v_j`"));
            }
            let j: i32 = fields[0].parse().map_err(|_| err("bad index"))?;
            let aj: f64 = fields[1].parse().map_err(|_| err("bad a_j"))?;
            let vj: f64 = fields[2].parse().map_err(|_| err("bad v_j"))?;
            match j_min {
                None => j_min = Some(j),
                Some(j0) if j != j0 + a.len() as i32 => return Err(err("indices must be consecutive")),
                _ => {}
            }
            a.push(aj);
            v.push(vj);
        }
        let j_min = j_min.ok_or(LacunaryError::Empty)?;
        let rho = match rho {
            Some(r) => r,
            None => a.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min),
        };
        LacunarySpec::new(rho, j_min, a, v)
    }
}

/// The j-range [N1, N2] of a window, checked so that a_j, a_{j+1} and v_j all exist.
pub fn window_indices(spec: &LacunarySpec, n: WindowPair) -> Result<RangeInclusive<i32>, LacunaryError> {
    spec.try_a(n.n1())?;
    spec.try_a(n.n2() + 1)?;
    Ok(n.n1()..=n.n2())
}

/// Result of normalization: η_k, ω_k for k in [k_min, ...], the position of every a_j
/// among the η, and the index sets J(j).
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSpec {
    spec: LacunarySpec,
    j_min: i32,
    /// k with η_k = a_j, for j = j_min, j_min+1, ...
    position: Vec<i32>,
}

impl NormalizedSpec {
    pub fn eta(&self) -> &[f64] {
        self.spec.a_values()
    }
    pub fn omega(&self) -> &[f64] {
        self.spec.v_values()
    }
    pub fn k_min(&self) -> i32 {
        self.spec.j_min()
    }
    /// η, ω as a lacunary spec with the same ρ.
    pub fn as_spec(&self) -> &LacunarySpec {
        &self.spec
    }
    pub fn into_spec(self) -> LacunarySpec {
        self.spec
    }

    /// k with η_k = a_j.
    pub fn position(&self, j: i32) -> Option<i32> {
        let i = j.checked_sub(self.j_min)?;
        self.position.get(usize::try_from(i).ok()?).copied()
    }

    /// J(j) = {k : a_j <= η_k < a_{j+1}}, and J(j_max) = {position of a_{j_max}}.
    pub fn remap(&self, j: i32) -> Option<RangeInclusive<i32>> {
        let k0 = self.position(j)?;
        match self.position(j + 1) {
            Some(k1) => Some(k0..=k1 - 1),
            None => Some(k0..=k0),
        }
    }

    /// N' with η_{N1'} = a_{N1} and η_{N2'+1} = a_{N2+1}, so that T_N under (a, v) equals
    /// T_{N'} under (η, ω).
    pub fn map_window(&self, n: WindowPair) -> Result<WindowPair, LacunaryError> {
        let k1 = self.position(n.n1()).ok_or(LacunaryError::OutOfRange {
            j: n.n1(),
            lo: self.j_min,
            hi: self.j_min + self.position.len() as i32 - 1,
        })?;
        let k2 = self.position(n.n2() + 1).ok_or(LacunaryError::OutOfRange {
            j: n.n2() + 1,
            lo: self.j_min,
            hi: self.j_min + self.position.len() as i32 - 1,
        })?;
        WindowPair::new(k1, k2 - 1)
    }
}

/// Inserts geometric steps of ratio ρ until every consecutive ratio lies in [ρ, ρ²].
///
/// Starting from a_0 (or a_{j_min} when 0 is not stored) the loop walks upward: while
/// a_next/η_current > ρ² it appends ρ·η_current, otherwise it appends a_next. Downward it
/// mirrors this with η_current/ρ. The anchor keeps its index, so η_k = a_k at the anchor.
pub fn normalize(spec: &LacunarySpec) -> NormalizedSpec {
    let rho = spec.rho();
    let rho2 = rho * rho;
    let j0 = if spec.j_min() <= 0 && 0 <= spec.j_max() { 0 } else { spec.j_min() };

    let mut up_eta = vec![spec.a(j0)];
    let mut up_omega = Vec::new();
    let mut up_pos = vec![0usize];
    let mut cur = spec.a(j0);
    for j in j0 + 1..=spec.j_max() {
        let next = spec.a(j);
        let vj = spec.v(j - 1);
        up_omega.push(vj);
        while next / cur > rho2 {
            cur *= rho;
            up_eta.push(cur);
            up_omega.push(vj);
        }
        cur = next;
        up_pos.push(up_eta.len());
        up_eta.push(next);
    }
    up_omega.push(spec.v(spec.j_max()));

    // downward from the anchor, built in reverse
    let mut down_eta = Vec::new();
    let mut down_omega = Vec::new();
    let mut down_pos = Vec::new();
    let mut cur = spec.a(j0);
    for j in (spec.j_min()..j0).rev() {
        let next = spec.a(j);
        let vj = spec.v(j);
        while cur / next > rho2 {
            cur /= rho;
            down_eta.push(cur);
            down_omega.push(vj);
        }
        cur = next;
        down_pos.push(down_eta.len());
        down_eta.push(next);
        down_omega.push(vj);
    }

    let below = down_eta.len();
    let k_min = j0 - below as i32;
    let mut eta: Vec<f64> = down_eta.into_iter().rev().collect();
    eta.extend(up_eta);
    let mut omega: Vec<f64> = down_omega.into_iter().rev().collect();
    omega.extend(up_omega);
    let mut position: Vec<i32> = down_pos.iter().rev().map(|&p| k_min + (below - 1 - p) as i32).collect();
    position.extend(up_pos.iter().map(|&p| j0 + p as i32));

    NormalizedSpec {
        spec: LacunarySpec { rho, j_min: k_min, a: eta, v: omega },
        j_min: spec.j_min(),
        position,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_checks() {
        assert!(matches!(
            LacunarySpec::new(2.0, 0, vec![1.0, 1.5], vec![1.0, 1.0]),
            Err(LacunaryError::NotLacunary { j: 0, .. })
        ));
        assert!(LacunarySpec::new(1.0, 0, vec![1.0], vec![1.0]).is_err());
        assert!(LacunarySpec::new(2.0, 0, vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(LacunarySpec::new(2.0, 0, vec![-1.0, 2.0], vec![1.0, 1.0]).is_err());
        let g = LacunarySpec::geometric(2.0, -3, 3, |j| j as f64).unwrap();
        assert_eq!(g.a(-3), 0.125);
        assert_eq!(g.v(2), 2.0);
        assert_eq!(g.j_max(), 3);
        assert!(g.try_a(4).is_err());
    }

    #[test]
    fn window_contract() {
        assert!(WindowPair::new(3, 3).is_err());
        let spec = LacunarySpec::geometric(2.0, 0, 3, |_| 1.0).unwrap();
        assert_eq!(window_indices(&spec, WindowPair::new(0, 1).unwrap()).unwrap(), 0..=1);
        assert!(window_indices(&spec, WindowPair::new(0, 3).unwrap()).is_err());
        let wide = LacunarySpec::geometric(2.0, -5, 5, |_| 1.0).unwrap();
        assert_eq!(window_indices(&wide, WindowPair::new(-2, 3).unwrap()).unwrap(), -2..=3);
    }

    #[test]
    fn text_round_trip() {
        let spec = LacunarySpec::geometric(3.0, -4, 4, |j| (j as f64 * 0.7).sin()).unwrap();
        let back = LacunarySpec::from_text(&spec.to_text()).unwrap();
        assert_eq!(back, spec);
        assert!(LacunarySpec::from_text("# rho 2\n0 1 1\n2 4 1\n").is_err());
        assert!(LacunarySpec::from_text("0 1 1 1\n").is_err());
        let no_header = LacunarySpec::from_text("\n# a comment\n0 1 1\n1 3 2\n").unwrap();
        assert_eq!(no_header.rho(), 3.0);
    }

    #[test]
    fn hand_traced_insertion() {
        let spec = LacunarySpec::new(2.0, 0, vec![1.0, 8.0], vec![5.0, 7.0]).unwrap();
        let n = normalize(&spec);
        assert_eq!(n.eta(), &[1.0, 2.0, 8.0]);
        assert_eq!(&n.omega()[..2], &[5.0, 5.0]);
        assert_eq!(n.remap(0), Some(0..=1));
        assert_eq!(n.remap(1), Some(2..=2));
    }

    #[test]
    fn identity_case() {
        let spec = LacunarySpec::new(2.0, 0, vec![1.0, 3.0, 9.0], vec![1.0, -1.0, 2.0]).unwrap();
        let n = normalize(&spec);
        assert_eq!(n.eta(), spec.a_values());
        assert_eq!(n.omega(), spec.v_values());
    }

    #[test]
    fn equality_ratio_takes_next() {
        let spec = LacunarySpec::new(2.0, 0, vec![1.0, 4.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(normalize(&spec).eta(), &[1.0, 4.0]);
    }

    #[test]
    fn downward_mirror() {
        let spec = LacunarySpec::new(2.0, -1, vec![1.0 / 16.0, 1.0, 64.0], vec![3.0, 4.0, 5.0]).unwrap();
        let n = normalize(&spec);
        assert_eq!(n.eta(), &[1.0 / 16.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 64.0]);
        assert_eq!(n.k_min(), -3);
        assert_eq!(n.position(-1), Some(-3));
        assert_eq!(n.position(0), Some(0));
        assert_eq!(n.position(1), Some(5));
        assert_eq!(n.omega(), &[3.0, 3.0, 3.0, 4.0, 4.0, 4.0, 4.0, 4.0, 5.0]);
        assert_eq!(n.remap(-1), Some(-3..=-1));
        let w = n.map_window(WindowPair::new(-1, 0).unwrap()).unwrap();
        assert_eq!((w.n1(), w.n2()), (-3, 4));
    }

    #[test]
    fn anchor_without_zero() {
        let spec = LacunarySpec::new(2.0, 3, vec![1.0, 10.0, 100.0], vec![1.0, 2.0, 3.0]).unwrap();
        let n = normalize(&spec);
        assert_eq!(n.k_min(), 3);
        assert_eq!(n.eta()[0], 1.0);
        for w in n.eta().windows(2) {
            let r = w[1] / w[0];
            assert!((2.0..=4.0).contains(&r), "{r}");
        }
    }
}
