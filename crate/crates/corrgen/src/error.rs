use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid caller-supplied data (bad waypoints, inconsistent flags, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A path parameter outside the path domain.
    #[error("path parameter {xi} outside domain [{lo}, {hi}]")]
    Domain { xi: f64, lo: f64, hi: f64 },

    /// An ellipse matrix that is not positive definite where it must be.
    #[error("degenerate corridor slice at xi = {xi}: {reason}")]
    Degenerate { xi: f64, reason: String },

    /// The volume-maximization program has no finite optimum.
    #[error("unbounded problem: {0}")]
    Unbounded(String),

    /// The backend reported infeasibility. The wrapped program is always
    /// feasible, so this surfaces solver diagnostics rather than retrying.
    #[error("solver reported infeasible problem: {0}")]
    Infeasible(String),

    /// The backend failed numerically.
    #[error("solver numerical failure: {0}")]
    SolverFailure(String),

    /// A malformed input file.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
