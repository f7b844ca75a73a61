use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("lattice algebra dimension must be at least 1")]
    ZeroDimension,

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("generator violates the positive minimum principle: entry ({row},{col}) = {value} < 0")]
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("t*|Q| = {scaled} exceeds the evolution cap {cap}")]
    Overflow { scaled: f64, cap: f64 },

    #[error("|e - f| = {radius} exceeds the log-series radius {limit}")]
    RadiusViolation { radius: f64, limit: f64 },

    #[error("log series did not converge within {max_terms} terms")]
    MaxTermsExceeded { max_terms: usize },

    #[error("input must be strictly positive: entry {index} = {value}")]
    NonPositiveInput { index: usize, value: f64 },

    #[error("exponent {exponent} at entry {index} overflows")]
    ExpOverflow { index: usize, exponent: f64 },

    #[error("finite-difference step {step} is below the cancellation guard 1e-6")]
    StepTooSmall { step: f64 },

    #[error("step h must be positive, got {0}")]
    NonPositiveStep(f64),

    #[error("generator is not conservative (max |row sum| = {max_row_sum}); semigroup is not normalized")]
    NotNormalized { max_row_sum: f64 },

    #[error("dual vector is not positive: entry {index} = {value}")]
    NonPositiveDual { index: usize, value: f64 },

    #[error("exponent midpoint {p} is within 1e-6 of a singular parameter (0 or 1)")]
    IllConditionedMidpoint { p: f64 },

    #[error("parameter {p} lies outside [{lo}, {hi}]")]
    ParamOutOfDomain { p: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Errors raised because an input violates a hypothesis of the verified
    /// inequalities rather than being malformed.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            Error::NotNormalized { .. } | Error::NonPositiveDual { .. } | Error::IllConditionedMidpoint { .. }
        )
    }
}
