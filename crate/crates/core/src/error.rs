use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("index {index} out of range for rank {rank}")]
    Index { index: usize, rank: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("not skew-symmetrizable: {0}")]
    NotSkewSymmetrizable(String),
    #[error("invalid triangulation: {0}")]
    Triangulation(String),
    #[error("arc {0} cannot be flipped")]
    Unflippable(usize),
    #[error("malformed curve: {0}")]
    MalformedCurve(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
