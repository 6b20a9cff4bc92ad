use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("element {0} is not invertible in the scalar tower")]
    NotInvertible(String),
    #[error("scalar {0} has an s-component where a Q(i) value is required")]
    NotRational(String),
    #[error("rank mismatch: expected n={expected}, got n={got}")]
    RankMismatch { expected: usize, got: usize },
    #[error("element still contains the central generator z; reduce it first")]
    UnreducedCentral,
    #[error("mixed reduction status: {0}")]
    ReductionMismatch(String),
    #[error("truncation window exceeded: {0}")]
    Truncation(String),
    #[error("incompatible module kind: {0}")]
    KindMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
