use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("integration diverged at step {step} (dt = {dt})")]
    IntegrationDivergence { step: usize, dt: f64 },

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("unknown planner `{0}`")]
    UnknownPlanner(String),

    #[error("unknown environment `{0}`")]
    UnknownEnvironment(String),

    #[error("unknown node id {0}")]
    UnknownNode(usize),

    #[error("nearest-neighbor query on an empty graph")]
    EmptyGraph,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("failed to parse environment file {path}: {message}")]
    EnvironmentParse { path: PathBuf, message: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Errors caused by bad user input, as opposed to failures during a run.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::UnknownSystem(_)
                | Error::UnknownPlanner(_)
                | Error::UnknownEnvironment(_)
                | Error::InvalidConfig(_)
                | Error::DimensionMismatch { .. }
                | Error::EnvironmentParse { .. }
        )
    }
}
