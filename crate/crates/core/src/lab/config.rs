use std::fmt;
use std::str::FromStr;

use crate::funcspace::Grid;
use crate::quad::QuadConfig;

use super::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentId {
    Diverge,
    Growth,
    Converge,
    Norms,
    KernelBounds,
    Multiplier,
    Cotlar,
    Weights,
    ContourIdentity,
    Normalize,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 10] = [
        ExperimentId::KernelBounds,
        ExperimentId::ContourIdentity,
        ExperimentId::Multiplier,
        ExperimentId::Normalize,
        ExperimentId::Weights,
        ExperimentId::Cotlar,
        ExperimentId::Diverge,
        ExperimentId::Growth,
        ExperimentId::Converge,
        ExperimentId::Norms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Diverge => "diverge",
            ExperimentId::Growth => "growth",
            ExperimentId::Converge => "converge",
            ExperimentId::Norms => "norms",
            ExperimentId::KernelBounds => "kernel-bounds",
            ExperimentId::Multiplier => "multiplier",
            ExperimentId::Cotlar => "cotlar",
            ExperimentId::Weights => "weights",
            ExperimentId::ContourIdentity => "lemma21",
            ExperimentId::Normalize => "normalize",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentId {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self, LabError> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| LabError::InvalidConfig(format!("unknown experiment `{s}`")))
    }
}

/// Parameters shared by all experiments. Unset fields take per-experiment defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentId>,
    pub alpha: Option<f64>,
    /// base of the geometric sequence a_j = a^j
    pub a: Option<f64>,
    pub rho: Option<f64>,
    /// largest truncation level
    pub m: Option<i32>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub eps: Option<f64>,
    pub grid_lo: Option<f64>,
    pub grid_hi: Option<f64>,
    pub grid_step: Option<f64>,
    pub rel_tol: Option<f64>,
    pub out: Option<String>,
    /// lacunary sequence in the `j a_j v_j` text format
    pub sequence: Option<String>,
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, LabError> {
    v.parse()
        .map_err(|_| LabError::InvalidConfig(format!("bad value `{v}` for `{key}`")))
}

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment. Keys use the flag names with `-` or `_`.
    pub fn parse(text: &str) -> Result<Self, LabError> {
        let mut cfg = ExperimentConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| LabError::InvalidConfig(format!("line {}: expected `key = value`", n + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<(), LabError> {
        let key = key.replace('_', "-");
        match key.as_str() {
            "experiment" => self.experiment = Some(v.parse()?),
            "alpha" => self.alpha = Some(parse_num(&key, v)?),
            "a" => self.a = Some(parse_num(&key, v)?),
            "rho" => self.rho = Some(parse_num(&key, v)?),
            "M" | "m" => self.m = Some(parse_num(&key, v)?),
            "p" => self.p = Some(parse_num(&key, v)?),
            "q" => self.q = Some(parse_num(&key, v)?),
            "eps" => self.eps = Some(parse_num(&key, v)?),
            "grid-lo" => self.grid_lo = Some(parse_num(&key, v)?),
            "grid-hi" => self.grid_hi = Some(parse_num(&key, v)?),
            "grid-step" => self.grid_step = Some(parse_num(&key, v)?),
            "rel-tol" => self.rel_tol = Some(parse_num(&key, v)?),
            "out" => self.out = Some(v.to_string()),
            _ => return Err(LabError::InvalidConfig(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overridden_by(&self, other: &ExperimentConfig) -> ExperimentConfig {
        macro_rules! pick {
            ($($f:ident),*) => {
                ExperimentConfig { $($f: other.$f.clone().or_else(|| self.$f.clone()),)* }
            };
        }
        pick!(experiment, alpha, a, rho, m, p, q, eps, grid_lo, grid_hi, grid_step, rel_tol, out, sequence)
    }

    pub(crate) fn alpha_or(&self, d: f64) -> Result<f64, LabError> {
        let a = self.alpha.unwrap_or(d);
        if a > 0.0 && a < 1.0 {
            Ok(a)
        } else {
            Err(LabError::InvalidConfig(format!("alpha must lie in (0, 1), got {a}")))
        }
    }

    /// Geometric base: `a`, else `rho`, else the default.
    pub(crate) fn base_or(&self, d: f64) -> Result<f64, LabError> {
        let b = self.a.or(self.rho).unwrap_or(d);
        if b > 1.0 && b.is_finite() {
            Ok(b)
        } else {
            Err(LabError::InvalidConfig(format!("the sequence base must exceed 1, got {b}")))
        }
    }

    pub(crate) fn m_or(&self, d: i32, min: i32) -> Result<i32, LabError> {
        let m = self.m.unwrap_or(d);
        if m >= min && m <= 40 {
            Ok(m)
        } else {
            Err(LabError::InvalidConfig(format!("M must lie in [{min}, 40], got {m}")))
        }
    }

    pub(crate) fn p_or(&self, d: f64, min: f64) -> Result<f64, LabError> {
        let p = self.p.unwrap_or(d);
        if p >= min && p.is_finite() {
            Ok(p)
        } else {
            Err(LabError::InvalidConfig(format!("p must be at least {min}, got {p}")))
        }
    }

    pub(crate) fn q_or(&self, d: f64) -> Result<f64, LabError> {
        let q = self.q.unwrap_or(d);
        if q > 1.0 && q.is_finite() {
            Ok(q)
        } else {
            Err(LabError::InvalidConfig(format!("q must exceed 1, got {q}")))
        }
    }

    pub(crate) fn grid_or(&self, lo: f64, hi: f64, step: f64) -> Result<Grid, LabError> {
        let (lo, hi, step) = (self.grid_lo.unwrap_or(lo), self.grid_hi.unwrap_or(hi), self.grid_step.unwrap_or(step));
        Grid::from_range(lo, hi, step).map_err(|e| LabError::InvalidConfig(e.to_string()))
    }

    pub(crate) fn quad(&self) -> Result<QuadConfig, LabError> {
        let mut q = QuadConfig::default();
        if let Some(r) = self.rel_tol {
            if !(r > 0.0 && r < 1e-2) {
                return Err(LabError::InvalidConfig(format!("rel-tol must lie in (0, 0.01), got {r}")));
            }
            let abs = q.abs_tol.min(r * 1e-3);
            q = q.with_tolerances(r, abs);
        }
        Ok(q)
    }
}

/// Powers of two from `start` up to `max`, plus `max` itself.
pub(crate) fn ladder(start: i32, max: i32) -> Vec<i32> {
    let mut v = Vec::new();
    let mut m = start;
    while m < max {
        v.push(m);
        m *= 2;
    }
    v.push(max);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let file = ExperimentConfig::parse("# sweep\nalpha = 0.3\nM = 8  # cap\ngrid_step=0.1\n").unwrap();
        assert_eq!(file.alpha, Some(0.3));
        assert_eq!(file.m, Some(8));
        assert_eq!(file.grid_step, Some(0.1));
        let flags = ExperimentConfig {
            alpha: Some(0.7),
            ..Default::default()
        };
        let merged = file.overridden_by(&flags);
        assert_eq!(merged.alpha, Some(0.7));
        assert_eq!(merged.m, Some(8));
        assert!(ExperimentConfig::parse("nonsense").is_err());
        assert!(ExperimentConfig::parse("beta = 1").is_err());
        assert!(ExperimentConfig::parse("alpha = x").is_err());
        assert_eq!(ExperimentConfig::parse("experiment = kernel-bounds").unwrap().experiment, Some(ExperimentId::KernelBounds));
    }

    #[test]
    fn validation() {
        let c = ExperimentConfig {
            alpha: Some(1.2),
            ..Default::default()
        };
        assert!(c.alpha_or(0.5).is_err());
        assert!(ExperimentConfig::default().m_or(16, 2).is_ok());
        assert_eq!(ladder(2, 16), vec![2, 4, 8, 16]);
        assert_eq!(ladder(4, 12), vec![4, 8, 12]);
    }
}
