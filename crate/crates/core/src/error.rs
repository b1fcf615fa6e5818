//! Error type shared by every stage of the simulator.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// A value passed to an operation is outside its domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A recurrence or exponential left the representable range.
    #[error("numeric range error: {0}")]
    NumericRange(String),

    /// Amplitude pushed past the top Fock level exceeded the tail tolerance.
    #[error("Fock truncation overflow: lost weight {lost:.3e} exceeds tolerance {tolerance:.1e}")]
    Truncation { lost: f64, tolerance: f64 },

    /// Position grid too small, too coarse, or aliasing after free flight.
    #[error("grid error: {0}")]
    Grid(String),

    /// A quadrature outcome whose probability density is numerically zero.
    #[error("impossible measurement outcome: density {0:.3e}")]
    ImpossibleOutcome(f64),

    /// The visibility window holds no interior extremum.
    #[error("visibility undefined: {0}")]
    UndefinedVisibility(String),

    /// A run finished but one of its invariants is outside tolerance.
    #[error("tolerance check failed: {0}")]
    Tolerance(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown sphere case `{0}` (expected one of V1, VD, D1, DC, C1, CV, VDC)")]
    UnknownCase(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type SimResult<T> = Result<T, SimError>;

impl SimError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Config(_)
            | SimError::UnknownCase(_)
            | SimError::Json(_)
            | SimError::InvalidInput(_) => 2,
            SimError::NumericRange(_)
            | SimError::Truncation { .. }
            | SimError::Grid(_)
            | SimError::ImpossibleOutcome(_)
            | SimError::UndefinedVisibility(_)
            | SimError::Tolerance(_) => 3,
            SimError::Io(_) => 1,
        }
    }
}
