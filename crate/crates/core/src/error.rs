use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("operands live in different graded contexts")]
    ContextMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("permutation/degree length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("element is not homogeneous")]
    Inhomogeneous,
    #[error("wrong degree: expected {expected}, got {got}")]
    WrongDegree { expected: i64, got: i64 },
    #[error("element is not a Poisson structure: [pi,pi] != 0")]
    NotPoisson,
    #[error("operator is not a cocycle on the truncated space")]
    NotCocycle,
    #[error("truncation too small to decompose the cocycle")]
    TruncationTooSmall,
    #[error("argument lies outside the abelian subalgebra")]
    OutsideSubalgebra,
    #[error("series order {0} not supported here (max {1})")]
    UnsupportedOrder(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
