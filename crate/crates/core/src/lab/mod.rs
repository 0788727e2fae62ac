//! Experiment runners. Each returns an [`ExperimentReport`] holding its CSV artifacts and
//! the pass/fail verdicts; writing files is left to the caller.

mod checks;
mod config;
mod operators;
mod report;
mod shells;

use thiserror::Error;

use crate::funcspace::FuncError;
use crate::kernel::KernelError;
use crate::lacunary::LacunaryError;
use crate::maximal::MaximalError;
use crate::poisson::PoissonError;
use crate::quad::QuadError;
use crate::transform::TransformError;

pub use checks::{run_kernel_bounds, run_contour_identity, run_multiplier, run_normalize, run_weights, CONTOUR_PAIRS};
pub use config::{ExperimentConfig, ExperimentId};
pub use operators::{run_convergence, run_cotlar, run_norm_sweep};
pub use report::{Artifact, ExperimentReport, Verdict};
pub use shells::{run_divergence, run_growth, shell_integral};

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no base a <= {limit} satisfies the shell dominance condition")]
    ScanExhausted { limit: u32 },
    #[error("exponent fit needs at least 4 radii, got {0}")]
    FitDegenerate(usize),
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error(transparent)]
    Poisson(#[from] PoissonError),
    #[error(transparent)]
    Lacunary(#[from] LacunaryError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Maximal(#[from] MaximalError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Runs the experiment named in `cfg.experiment`.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    let id = cfg
        .experiment
        .ok_or_else(|| LabError::InvalidConfig("no experiment selected".into()))?;
    run_experiment(id, cfg)
}

pub fn run_experiment(id: ExperimentId, cfg: &ExperimentConfig) -> Result<ExperimentReport, LabError> {
    match id {
        ExperimentId::Diverge => run_divergence(cfg),
        ExperimentId::Growth => run_growth(cfg),
        ExperimentId::Converge => run_convergence(cfg),
        ExperimentId::Norms => run_norm_sweep(cfg),
        ExperimentId::KernelBounds => run_kernel_bounds(cfg),
        ExperimentId::Multiplier => run_multiplier(cfg),
        ExperimentId::Cotlar => run_cotlar(cfg),
        ExperimentId::Weights => run_weights(cfg),
        ExperimentId::ContourIdentity => run_contour_identity(cfg),
        ExperimentId::Normalize => run_normalize(cfg),
    }
}

/// (max − min) / min of nonnegative values; 0 when all vanish.
pub fn relative_drift(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else if min <= 0.0 {
        f64::INFINITY
    } else {
        (max - min) / min
    }
}

/// Least-squares (slope, intercept) of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// a_j = base^j for j in [lo, hi] with multipliers v.
pub(crate) fn geometric_spec(
    base: f64,
    lo: i32,
    hi: i32,
    v: impl Fn(i32) -> f64,
) -> Result<crate::lacunary::LacunarySpec, LabError> {
    Ok(crate::lacunary::LacunarySpec::geometric(base, lo, hi, v)?)
}

pub(crate) fn alternating(j: i32) -> f64 {
    if j.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_and_fit() {
        assert_eq!(relative_drift(&[0.0, 0.0]), 0.0);
        assert!((relative_drift(&[1.0, 1.1, 1.05]) - 0.1).abs() < 1e-12);
        assert!(relative_drift(&[0.0, 1.0]).is_infinite());
        let (s, c) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((s - 2.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12);
        assert_eq!(alternating(-3), -1.0);
        assert_eq!(alternating(4), 1.0);
    }
}
