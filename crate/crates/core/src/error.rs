use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid radar parameters: {0}")]
    InvalidParams(String),

    #[error("scatterer range {range:.3} m outside (0, {max_range:.3}) m unambiguous window")]
    RangeAmbiguity { range: f64, max_range: f64 },

    #[error("unknown motion class id {0}")]
    UnknownClass(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("signal of length {len} is shorter than the {win_len}-sample window")]
    SignalTooShort { len: usize, win_len: usize },

    #[error("range map has no bin above the energy floor")]
    EmptyMap,

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
