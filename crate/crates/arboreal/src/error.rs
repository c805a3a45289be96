use thiserror::Error;

/// Errors for model construction, exact computation and sampling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("oracle scale refused: {0}")]
    OracleScale(String),

    #[error("invalid cylinder spec: {0}")]
    InvalidSpec(String),

    #[error("operation requires beta >= beta_c = {beta_c}, got beta = {beta} ({note})")]
    SubcriticalRegime {
        beta: f64,
        beta_c: f64,
        note: &'static str,
    },

    #[error("configurations live over different edge universes")]
    UniverseMismatch,

    #[error("non-finite intermediate value in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
