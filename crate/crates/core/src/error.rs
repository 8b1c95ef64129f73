use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A chain step was requested with too few live vertices left, i.e.
    /// `N(t) <= k`.
    #[error("horizon reached: N(t) = {live} is not larger than k = {k}")]
    Horizon { live: u64, k: usize },

    #[error("invalid chain state: {0}")]
    State(String),

    #[error("solver failed: {msg} (residual {residual:e}, {iterations} iterations)")]
    Solver {
        msg: String,
        residual: f64,
        iterations: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
