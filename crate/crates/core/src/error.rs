use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported modulation order {0} (expected 4, 16 or 64)")]
    UnsupportedOrder(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("channel column {0} has zero norm")]
    ZeroColumn(usize),
    #[error("linear system is singular")]
    Singular,
    #[error("exhaustive search over {0} candidates exceeds the 2^20 limit")]
    SearchSpaceTooLarge(u128),
    #[error("frozen position {0} carries a nonzero bit")]
    NonzeroFrozen(usize),
    #[error("variance evolution did not reach a fixed point within {0} iterations")]
    NoConvergence(usize),
    #[error("unknown detector `{0}`")]
    UnknownDetector(String),
    #[error("malformed code specification: {0}")]
    CodeSpec(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
