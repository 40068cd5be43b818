//! Experiment runner for event-based E/PD learning-rate control.
//!
//! Wraps [`epd_core`] with everything that touches the outside world:
//! TOML configs, the flat binary dataset format, CSV epoch logs, JSON config
//! echoes and network checkpoints, parallel sweeps and report tables.

pub mod checkpoint;
pub mod config;
pub mod dataset;
pub mod experiment;
pub mod records;
pub mod report;
pub mod sweep;

use std::io;
use std::path::{Path, PathBuf};

pub use config::{Algorithm, ExperimentConfig, Overrides};
pub use experiment::{run_experiment, write_run, RunOutput};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("dataset: {0}")]
    Dataset(String),
    #[error(transparent)]
    Data(#[from] epd_core::data::DataError),
    #[error(transparent)]
    Nn(#[from] epd_core::nn::NnError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing results: {0}")]
    MissingResults(String),
    #[error("report: {0}")]
    Report(String),
    #[error("{failed} of {total} sweep cells failed")]
    Sweep { failed: usize, total: usize },
}

impl Error {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
