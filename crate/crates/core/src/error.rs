use thiserror::Error;

#[derive(Debug, Error)]
pub enum RprError {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("ground truth is required but the problem has none")]
    MissingTruth,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("all measurements are zero")]
    AllZeroMeasurements,

    #[error("malformed PPM image: {0}")]
    Ppm(String),

    #[error("malformed trace CSV at line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, RprError>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(RprError::DimensionMismatch { expected, got })
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> RprError {
    RprError::InvalidParameter(msg.into())
}
