use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("dimension {dim} exceeds the oracle limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("numerical rank is {found}, expected {expected}")]
    RankDeficiencyMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("{0}")]
    Numerical(String),

    #[error(transparent)]
    Core(#[from] bttb_precond_core::Error),
}

pub type Result<T> = std::result::Result<T, OracleError>;
