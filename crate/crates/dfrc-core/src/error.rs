//! Error values shared across the crate.
//!
//! Every fallible operation returns [`Error`] so that callers (including the
//! command-line harness) can map failures onto distinct exit codes:
//! configuration problems, infeasible constraint sets, and numerical
//! breakdowns are different failure classes and are never conflated.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure classes produced by the simulator.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// A configuration file or configuration field is invalid.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An operation was called with arguments outside its domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A constraint set admits no solution; names the binding constraint.
    #[error("infeasible: {constraint}: {detail}")]
    Infeasible {
        /// Short name of the constraint that cannot be met.
        constraint: String,
        /// Human-readable explanation with the offending numbers.
        detail: String,
    },

    /// A numerical method failed (singular system, non-convergence, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A cost guard tripped: the request is valid but too expensive to run.
    #[error("cost guard exceeded: {0}")]
    GuardExceeded(String),
}

impl Error {
    /// Shorthand for [`Error::InvalidArgument`].
    pub fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Shorthand for [`Error::InvalidConfig`].
    pub fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// Shorthand for [`Error::Numerical`].
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Shorthand for [`Error::Infeasible`].
    pub fn infeasible(constraint: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Infeasible {
            constraint: constraint.into(),
            detail: detail.into(),
        }
    }

    /// Shorthand for [`Error::GuardExceeded`].
    pub fn guard(msg: impl Into<String>) -> Self {
        Error::GuardExceeded(msg.into())
    }
}
