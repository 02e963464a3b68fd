use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("power iteration did not converge after {iterations} iterations (last estimate {last_estimate})")]
    NoConvergence {
        iterations: usize,
        last_estimate: f64,
    },

    #[error("singular system: pivot {pivot:e} at column {column} below threshold {threshold:e}")]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("unsupported transform length {0} (must be a power of two)")]
    UnsupportedLength(usize),

    #[error("series too short: need {needed} samples, have {available}")]
    SeriesTooShort { needed: usize, available: usize },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
