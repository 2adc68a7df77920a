use thiserror::Error;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("value {value} outside the open domain ({lower}, {upper})")]
    Domain { value: f64, lower: f64, upper: f64 },

    #[error("time {time} outside [0, {horizon}]")]
    TimeOutOfRange { time: f64, horizon: f64 },

    #[error("Newton iteration did not converge at step {step} after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence {
        step: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("phase field left the potential domain at step {step} (value {value})")]
    SeparationViolation { step: usize, value: f64 },

    #[error("non-finite value detected in {0}")]
    NanDetected(&'static str),

    #[error("singular linear system at pivot {0}")]
    SingularMatrix(usize),

    #[error("tau index {index} outside 0..={nt}")]
    InvalidTauIndex { index: usize, nt: usize },

    /// The time derivative at tau = 0 needs a forward difference of the
    /// phase field; `forward_value` carries the one-sided estimate.
    #[error("time derivative at tau = 0 requires a forward difference (one-sided value {forward_value})")]
    ForwardDifferenceRequired { forward_value: f64 },

    #[error("Armijo line search failed after {backtracks} backtracks at iteration {iteration}")]
    LineSearchFailure { iteration: usize, backtracks: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
