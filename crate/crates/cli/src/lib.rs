//! Command-line front end for `cvqode-core`: run configuration, training runs
//! with CSV/JSON export, cost estimates and the built-in self-test.

use std::path::PathBuf;

use thiserror::Error;

pub mod commands;
pub mod config;
pub mod record;
pub mod run;

pub use config::RunConfig;
pub use record::RunRecord;
pub use run::{run_training, RunOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

/// Fixed-width scientific notation with 16 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.15e}")
}
