use std::io;

/// Errors produced by the watermarking pipeline.
#[derive(thiserror::Error, Debug)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("malformed PGM: {0}")]
    MalformedPgm(String),

    #[error("unsupported PGM maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),

    #[error("truncated PGM data: expected {expected} bytes, found {found}")]
    TruncatedData { expected: usize, found: usize },

    #[error("dimensions not multiple of 8: {width}x{height}")]
    DimensionsNotMultipleOf8 { width: usize, height: usize },

    #[error("invalid dimensions {width}x{height}: {reason}")]
    InvalidDimensions {
        width: usize,
        height: usize,
        reason: &'static str,
    },

    #[error("non-finite sample at index {0}")]
    NonFiniteSample(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid payload: {0}")]
    InvalidPayload(String),

    #[error("payload length ≠ {expected} (got {found})")]
    PayloadLength { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fewer distinct samples ({distinct}) than clusters ({clusters})")]
    TooFewDistinctSamples { distinct: usize, clusters: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
