use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected length {expected}, got {actual}")]
    Shape { expected: usize, actual: usize },

    #[error("variable {index} = {value} outside [{lower}, {upper}]")]
    Domain {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("trace has no recommendation")]
    MissingRecommendation,

    #[error("negative regret {regret:e}: front oracle and evaluator disagree")]
    NegativeRegret { regret: f64 },

    #[error("malformed trace: {0}")]
    Trace(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
