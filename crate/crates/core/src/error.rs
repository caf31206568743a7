use thiserror::Error;

/// Errors raised anywhere in the library.
///
/// `Hypothesis` is kept distinct from the others: it signals that a model fails
/// a mathematical precondition (non-critical affine law, transient Cesàro
/// input, degenerate variance) rather than a usage or numerical problem.
#[derive(Debug, Error)]
pub enum Error {
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("singular matrix")]
    Singular,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("not diagonalizable: {0}")]
    Defective(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("no observed returns within the horizon")]
    NoReturns,
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("power iteration did not converge (|first| ~ {first:.6}, |second| ~ {second:.6})")]
    NonConvergence { first: f64, second: f64 },
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
