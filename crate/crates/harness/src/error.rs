use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid sweep: {0}")]
    Sweep(String),
    #[error("{context}: {source}")]
    Scenario {
        context: String,
        #[source]
        source: etcrb_core::Error,
    },
    #[error(transparent)]
    Core(#[from] etcrb_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
