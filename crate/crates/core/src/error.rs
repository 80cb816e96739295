use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("missing property {0}")]
    MissingProperty(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("length error: {0}")]
    Length(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("data error: splat {index} has a non-finite {field}")]
    NonFinite { index: usize, field: &'static str },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unsupported format: {0}")]
    Unsupported(String),

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("png error: {0}")]
    Png(String),
}
