//! Crate-wide error type.

/// Errors produced by the solvers and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The right-hand matrix of a generalized eigenproblem is not
    /// positive definite.
    #[error("singular pencil: {0}")]
    SingularPencil(String),

    #[error("infeasible subproblem: {0}")]
    Infeasible(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Upper-bound inputs are inconsistent (feasible value exceeds the
    /// certified cap).
    #[error("degenerate bound range: {0}")]
    DegenerateRange(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
