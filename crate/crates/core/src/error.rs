use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("derivative order {order} is not supported (max {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("kernel dimensionality mismatch: expected {expected}D kernel")]
    Dimension { expected: usize },

    #[error("unknown kernel `{0}` (expected `gaussian` or `cauchy`)")]
    UnknownKernel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("duplicate support point at index {0}")]
    DuplicateSupport(usize),

    #[error("system is singular or near-singular (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
