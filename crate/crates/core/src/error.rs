use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("not a probability vector: {0}")]
    NotProbability(String),

    #[error("operation requires K = {required} temperatures, chain has K = {actual}")]
    TemperatureCount { required: usize, actual: usize },

    #[error("product space has {size} states, limit is {limit}")]
    ProductTooLarge { size: u128, limit: usize },

    #[error("generator is not reversible (max relative detailed-balance violation {violation:e})")]
    NotReversible { violation: f64 },

    #[error("absorbing state {0}: zero total exit rate")]
    AbsorbingState(usize),

    #[error("measure violates the weighted-symmetry condition (relative discrepancy {discrepancy:e})")]
    Infeasible { discrepancy: f64 },

    #[error("constraint target {target} outside achievable range ({min}, {max})")]
    TargetOutOfRange { target: f64, min: f64, max: f64 },

    #[error("multiplier bracket search failed: {0}")]
    BracketFailure(String),

    #[error("constraint map is not monotone in the multiplier: {0}")]
    NonMonotone(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
