use alloc::string::String;

/// Errors raised by coefficient generation, grid construction, operator
/// algebra and the stability analysis.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unsupported step number k={0}; BDF is available for 1 <= k <= 6")]
    UnsupportedSteps(usize),
    #[error("normalization {name} is not defined for k={k}")]
    UnsupportedNormalization { name: &'static str, k: usize },
    #[error("step ratio at position {index} is not a positive finite number")]
    InvalidRatio { index: usize },
    #[error("expected {expected} step ratios, got {got}")]
    RatioCount { expected: usize, got: usize },
    #[error("row is not preconsistent: deflation remainder {0:e}")]
    NotPreconsistent(f64),
    #[error("nodes do not match the row: {0}")]
    NodeMismatch(&'static str),
    #[error("grid is not strictly increasing: step {index} is {step:e}")]
    NonMonotoneGrid { index: usize, step: f64 },
    #[error("grid has {n} steps; at least {min} are required")]
    GridTooShort { n: usize, min: usize },
    #[error("grid map density is not positive at tau={tau}")]
    NonPositiveDensity { tau: f64 },
    #[error("invalid grid map: {0}")]
    InvalidMap(String),
    #[error("invalid controller configuration: {0}")]
    InvalidController(&'static str),
    #[error("step size underflow at t={t:e}")]
    StepUnderflow { t: f64 },
    #[error("error model is not positive and finite at t={t}")]
    InvalidErrorModel { t: f64 },
    #[error("controller exceeded {0} steps")]
    TooManySteps(usize),
    #[error("zero diagonal entry in row {0}")]
    ZeroDiagonal(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("root finder did not converge")]
    RootsDidNotConverge,
    #[error("method is not strongly stable: extraneous root radius q={0}")]
    NotStronglyStable(f64),
    #[error("finite-difference derivative did not converge")]
    DifferentiationFailed,
    #[error("grid regularity is not finite")]
    SingularRegularity,
    #[error("vanishing leading coefficient in row {0}")]
    VanishingLeading(usize),
    #[error("sweep needs at least 4 strictly increasing step counts, got {0}")]
    InvalidSweep(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    /// Stable snake_case tag for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::UnsupportedSteps(_) => "unsupported_steps",
            Error::UnsupportedNormalization { .. } => "unsupported_normalization",
            Error::InvalidRatio { .. } => "invalid_ratio",
            Error::RatioCount { .. } => "ratio_count",
            Error::NotPreconsistent(_) => "not_preconsistent",
            Error::NodeMismatch(_) => "node_mismatch",
            Error::NonMonotoneGrid { .. } => "non_monotone_grid",
            Error::GridTooShort { .. } => "grid_too_short",
            Error::NonPositiveDensity { .. } => "non_positive_density",
            Error::InvalidMap(_) => "invalid_map",
            Error::InvalidController(_) => "invalid_controller",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::InvalidErrorModel { .. } => "invalid_error_model",
            Error::TooManySteps(_) => "too_many_steps",
            Error::ZeroDiagonal(_) => "zero_diagonal",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::RootsDidNotConverge => "roots_did_not_converge",
            Error::NotStronglyStable(_) => "not_strongly_stable",
            Error::DifferentiationFailed => "differentiation_failed",
            Error::SingularRegularity => "singular_regularity",
            Error::VanishingLeading(_) => "vanishing_leading",
            Error::InvalidSweep(_) => "invalid_sweep",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }
}
