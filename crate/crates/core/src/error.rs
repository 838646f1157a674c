//! Error type shared by all solver components.

use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum SolverError {
    /// A configuration value is outside its admissible range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Vector lengths do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A caller-side precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A non-finite value appeared during computation.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The backtracking line search exhausted its budget.
    #[error("line search failed after {tried} backtracking steps (best f {best_f})")]
    LineSearchFail { tried: usize, best_f: f64 },

    /// A condition the algorithm's supporting theory guarantees did not hold.
    /// Indicates a bug or numerical breakdown, never ordinary input.
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    /// Failure reading or parsing an input file.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SolverError>;
