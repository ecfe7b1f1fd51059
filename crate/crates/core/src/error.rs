use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix dimensions must be even for 2x2 blocking, got {rows}x{cols}")]
    OddDimension { rows: usize, cols: usize },

    #[error("invalid coefficient {0}: entries must lie in {{-1, 0, 1}}")]
    InvalidCoefficient(i64),

    #[error("bilinear term {0} has an all-zero side")]
    ZeroSide(String),

    #[error("{what} with {m} terms exceeds the tractability bound of {max}")]
    Intractable { what: &'static str, m: usize, max: usize },

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("unknown term label `{0}`")]
    UnknownLabel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("decode coefficients are not integral for an integer matrix")]
    Inexact,

    #[error("cross-check failed: {0}")]
    CrossCheck(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
