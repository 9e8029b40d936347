use thiserror::Error;

use crate::drx::{DrxEvent, Mode};

/// Errors produced by the model, the simulator and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    /// A function argument violated its documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The DRX state machine received an event that is not legal in its
    /// current mode. This always indicates a simulator bug.
    #[error("protocol violation: {event:?} is not legal in mode {mode:?}")]
    ProtocolViolation { mode: Mode, event: DrxEvent },

    /// Offered load is not below the service rate.
    #[error("unstable system: utilization {rho} is not below 1")]
    Unstable { rho: f64 },

    /// A closed form hit a zero denominator.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Malformed input text (traces, experiment files, CSV).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Well-formed input that breaks a data invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
