use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid probability mass function: {0}")]
    InvalidPmf(String),

    #[error("{name} = {value} is outside [{low}, {high}]")]
    OutOfRange { name: &'static str, value: f64, low: f64, high: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("x = {0} is outside the support of the model")]
    OutsideSupport(f64),

    #[error("no conditional distribution for history ending in {0:?}")]
    UnresolvableHistory(Vec<f64>),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("work limit exceeded: {work} candidates needed, limit is {limit}")]
    WorkLimitExceeded { work: u64, limit: u64 },

    #[error("numerical drift of {drift:e} exceeds {limit:e}")]
    NumericalDrift { drift: f64, limit: f64 },
}

impl Error {
    /// True for errors that mean "valid input, but no answer within the
    /// configured search" rather than malformed input.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_) | Error::WorkLimitExceeded { .. })
    }
}
