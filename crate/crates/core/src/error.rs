use thiserror::Error;

/// Errors raised while evaluating bounds, geometry or estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("numerical evaluation did not converge in {what} (partial estimate {partial:e})")]
    NonConvergence { what: &'static str, partial: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error(
        "vertex enumeration over {dims} box dimensions exceeds the budget of {max} \
         (use the ball relaxation r_max(H B(||a||)) = {relaxation:e} instead)"
    )]
    VertexBudget {
        dims: usize,
        max: usize,
        relaxation: f64,
    },

    #[error("channel matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("degenerate input space: {0}")]
    Degenerate(String),

    #[error("matrix is not orthogonal (deviation {0:e})")]
    NotOrthogonal(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("support of {points} points exceeds the limit of {limit}")]
    SupportTooLarge { points: usize, limit: usize },

    #[error("sample budget {given} is below the minimum of {min}")]
    BudgetTooSmall { given: usize, min: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        what,
        detail: detail.into(),
    }
}
