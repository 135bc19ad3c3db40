//! Error type shared by all estimator modules.

use thiserror::Error;

/// Errors produced by the estimation and simulation routines.
#[derive(Debug, Error)]
pub enum FtsError {
    #[error("invalid bandwidth: {0}")]
    InvalidBandwidth(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("domain violation: {0}")]
    InvalidDomain(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid lag: {0}")]
    InvalidLag(String),

    #[error("empty window: {0}")]
    EmptyWindow(String),

    /// No bandwidth candidate produced a usable smoothing window anywhere.
    #[error("no valid bandwidth: {0}")]
    NoValidBandwidth(String),

    /// Every bandwidth in the grid was infeasible for the risk minimization.
    #[error("no feasible bandwidth: {0}")]
    NoFeasibleBandwidth(String),

    /// Squared-increment statistics vanished (constant sample paths).
    #[error("degenerate increments: {0}")]
    DegenerateIncrements(String),

    /// Covariance factorization failed even after jitter escalation.
    #[error("covariance not positive semi-definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("singular local fit: {0}")]
    SingularFit(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FtsError>;
