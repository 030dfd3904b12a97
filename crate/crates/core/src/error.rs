use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure categories shared by every module. The CLI maps each category
/// onto its own exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation
    /// (non-finite observation, non-positive argument, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// Caller broke a documented precondition (time going backwards,
    /// stepping a stopped agent, ...).
    #[error("contract violation: {0}")]
    Contract(String),
    /// A Monte Carlo estimate had no usable trials.
    #[error("estimation failure: {0}")]
    Estimation(String),
    /// A numerical routine failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Result not representable as a finite `f64`.
    #[error("range error: {0}")]
    Range(String),
}

pub(crate) fn ensure_finite(x: f64, what: &str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be finite, got {x}")))
    }
}
