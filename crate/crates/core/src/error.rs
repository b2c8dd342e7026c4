use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Task indices are 1-based.
    #[error("dimension mismatch in task {task}: {detail}")]
    DimensionMismatch { task: usize, detail: String },

    #[error("task {task} has no samples")]
    EmptyTask { task: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("line search failed at iteration {iteration}: no appropriate step after {doublings} doublings")]
    LineSearchFailure { iteration: usize, doublings: usize },

    #[error("objective became non-finite at iteration {iteration}")]
    Divergence { iteration: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
