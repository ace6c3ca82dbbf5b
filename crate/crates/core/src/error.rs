//! Error type shared by the whole crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A beacon coincides with an evaluation point; the path-loss law is
    /// singular at zero distance and callers must keep the two apart.
    #[error("beacon coincides with evaluation point at ({x}, {y})")]
    Singularity { x: f64, y: f64 },

    /// A solver broke down numerically (non-finite residual or objective).
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// A feasibility search exhausted its domain.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A monotonicity assumption checked at runtime does not hold.
    #[error("monotonicity violated: {0}")]
    NonMonotone(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
