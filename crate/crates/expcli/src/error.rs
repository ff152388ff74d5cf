use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: unexpected CSV header {found:?}")]
    Header { path: PathBuf, found: Vec<String> },
    #[error("config: {0}")]
    Config(String),
    #[error("infeasible scenario: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Core(#[from] confsr::Error),
}

pub type Result<T> = std::result::Result<T, ExpError>;
