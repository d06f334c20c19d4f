use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid slot selection: {0}")]
    InvalidSlots(String),

    /// A state or operator failed validation; `field` names the violated property
    /// (`hermiticity`, `trace`, `positivity`, `unitarity`, `normalization`, ...).
    #[error("validation failed ({field}): residual {residual:e} exceeds {tolerance:e}")]
    Validation {
        field: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("objective returned a non-real value (imaginary part {0:e})")]
    NonRealObjective(f64),

    #[error("dimension {n} exceeds the cost guard ({limit}) for {what}")]
    CostGuard {
        what: &'static str,
        n: usize,
        limit: usize,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
