use thiserror::Error;

/// Errors raised by the simulator and the error-budget engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid order {0}: the NOON order must be at least 1")]
    InvalidOrder(u32),

    #[error("unknown transition `{0}` (expected one of g-ra, g-rb, ra-sa, rb-sb)")]
    UnknownTransition(String),

    #[error("event after ionization measurement at position {0}")]
    EventAfterMeasurement(usize),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integrator step size underflow at t = {time:.6e} of {duration:.6e} (h = {step:.3e})")]
    StepUnderflow { time: f64, duration: f64, step: f64 },

    #[error("integrator exceeded {max_steps} steps at t = {time:.6e} of {duration:.6e}")]
    TooManySteps { max_steps: usize, time: f64, duration: f64 },

    #[error("non-finite generator entry at ({row}, {col})")]
    NonFiniteGenerator { row: usize, col: usize },

    #[error("displacement fit did not converge: {0}")]
    NonConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
