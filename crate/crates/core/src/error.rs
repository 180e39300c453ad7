use thiserror::Error;

/// Errors raised by geometry, estimators and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: domain has n = {expected}, point has {got} coordinates")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point lies outside the domain")]
    OutsideDomain,

    #[error("invalid domain spec: {0}")]
    InvalidSpec(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("rejection sampling acceptance rate {rate:.3e} is below the floor {floor:.3e}")]
    LowAcceptance { rate: f64, floor: f64 },

    #[error("empty sample set")]
    EmptySample,

    #[error("non-finite field value {value} at {at:?}")]
    NonFinite { value: f64, at: Vec<f64> },

    #[error("undefined quotient: the seminorm vanishes")]
    UndefinedQuotient,

    #[error("field has no global Lipschitz bound on this domain")]
    NotLipschitz,

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
