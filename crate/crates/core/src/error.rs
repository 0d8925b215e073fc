use thiserror::Error;

/// Errors raised by the structured operators, preconditioners and solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("largest eigenvalue magnitude is zero")]
    AllZeroSpectrum,

    #[error("kron-equal selection requires identical Toeplitz factors")]
    RuleMismatch,

    #[error("retained eigenvalue at frequency {frequency} is zero; inverse is undefined")]
    SingularRetainedEigenvalue { frequency: usize },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("image is {rows}x{cols}; a square image is required")]
    NonSquare { rows: usize, cols: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
