//! Error type shared by all core operations.

use alloc::string::String;
use core::fmt;

/// Errors surfaced by kernel construction, solvers, and the simulator.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition or type invariant.
    InvalidArgument(String),
    /// A linear solve or fixed-point computation failed to reach the
    /// required residual; carries the residual that was achieved.
    NumericalFailure {
        /// What was being solved when the failure occurred.
        context: String,
        /// The residual (or error measure) actually achieved.
        residual: f64,
    },
    /// An iteration hit its step limit without meeting its tolerance;
    /// carries the last two iterates so the caller can judge divergence.
    NonConvergence {
        /// What was iterating when the limit was hit.
        context: String,
        /// Second-to-last iterate.
        previous: f64,
        /// Last iterate.
        last: f64,
    },
    /// A computation produced a result that contradicts a structural
    /// guarantee (e.g. a non-threshold optimal action set). This is
    /// surfaced loudly instead of being silently repaired.
    StructuralViolation(String),
    /// The accept/reject indifference equation at a state is degenerate:
    /// its denominator is numerically zero, so no finite index exists.
    DegenerateIndifference {
        /// State whose index was requested.
        state: usize,
        /// The near-zero denominator.
        denominator: f64,
    },
    /// A policy that requires per-base-station index tables was invoked
    /// without them.
    MissingIndexTables,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::NumericalFailure { context, residual } => {
                write!(f, "numerical failure in {context}: residual {residual:e}")
            }
            Error::NonConvergence {
                context,
                previous,
                last,
            } => write!(
                f,
                "{context} did not converge: last iterates {previous} -> {last}"
            ),
            Error::StructuralViolation(msg) => write!(f, "structural violation: {msg}"),
            Error::DegenerateIndifference { state, denominator } => write!(
                f,
                "degenerate indifference at state {state}: denominator {denominator:e}"
            ),
            Error::MissingIndexTables => {
                write!(f, "the Whittle policy requires precomputed index tables")
            }
        }
    }
}

impl core::error::Error for Error {}

impl Error {
    /// Wraps an invalid-argument message.
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
