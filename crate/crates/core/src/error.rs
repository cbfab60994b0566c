//! Error type shared by the simulation library.

use std::fmt;

/// Errors raised by parameter validation and simulation execution.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violated a construction invariant.
    InvalidParam {
        /// Name of the offending parameter or rule.
        name: &'static str,
        /// What was violated.
        message: String,
    },
    /// A signal became non-finite during integration.
    NonFinite {
        /// Name of the first non-finite signal.
        signal: &'static str,
        /// Simulation time at which it was detected.
        time: f64,
    },
    /// A metrics window contained no samples.
    EmptyWindow,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParam { name, message } => {
                write!(f, "invalid parameter `{name}`: {message}")
            }
            Error::NonFinite { signal, time } => {
                write!(f, "signal `{signal}` became non-finite at t = {time:.6} s")
            }
            Error::EmptyWindow => write!(f, "metrics window contains no samples"),
        }
    }
}

impl std::error::Error for Error {}

/// Shorthand used by constructors.
pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Error {
    Error::InvalidParam {
        name,
        message: message.into(),
    }
}
