use thiserror::Error;

/// Errors raised by the numerical pipelines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alpha must be a positive finite number, got {0}")]
    NonPositiveAlpha(f64),
    #[error("measure normalization c_m must be positive, got {0}")]
    NonPositiveMeasureConstant(f64),
    #[error("period must be positive, got {0}")]
    NonPositivePeriod(f64),
    #[error("dimension parameter n must be at least 1")]
    InvalidDimension,
    #[error("measure exponent not integrable: need n + 1 > 4 alpha (n = {n}, alpha = {alpha})")]
    MeasureExponentNonIntegrable { n: u32, alpha: f64 },
    #[error("metric is degenerate on the singular axis r = 0")]
    SingularAxis,
    #[error("dilation scale must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("grid too coarse: refinement changed results by {indicator:.3e} (tolerance {tolerance:.3e})")]
    GridTooCoarse { indicator: f64, tolerance: f64 },
    #[error("refinement sequence does not contract: {0}")]
    NoConvergence(String),
    #[error("truncation radius too small: eigenfunction mass {mass:.3e} near r = {radius}")]
    TruncationTooSmall { mass: f64, radius: f64 },
    #[error("eigen solve failed: {0}")]
    EigenSolveFailure(String),
    #[error("spectral tail dominates at t = {t:.3e} (need t >= {t_min:.3e})")]
    TailDominates { t: f64, t_min: f64 },
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("no plateau: window variation {variation:.3e} exceeds tolerance {tolerance:.3e}")]
    NoPlateau { variation: f64, tolerance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
