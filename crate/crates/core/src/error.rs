use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid resolution {grid} is below the array size {elements}; the dictionary must be over-complete")]
    UnderCompleteGrid { grid: usize, elements: usize },

    #[error("resolution {resolution} violates the rule {rule}")]
    Divisibility { resolution: usize, rule: String },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("selected columns became linearly dependent after {selected} picks")]
    RankDeficient { selected: usize },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
