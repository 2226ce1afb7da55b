use thiserror::Error;

/// Errors produced by graph construction, model evaluation, and the
/// experiment pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate blockmodel: alpha*beta == gamma^2 (rank-1 expectation)")]
    DegenerateModel,

    #[error("node {0} has zero degree; prune isolated nodes before normalizing")]
    ZeroDegree(usize),

    #[error("snapshot node universes differ: {0} nodes vs {1} nodes")]
    SnapshotMismatch(usize, usize),

    #[error("labeling mismatch: {0}")]
    LabelMismatch(String),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
