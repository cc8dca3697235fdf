//! Batch driver for the `lpweights` experiments.
//!
//! Every command resolves an [`ExperimentConfig`], hands it to one library
//! routine, and turns the result into CSV/JSON artifacts plus a text
//! report. Nothing numeric happens here.

pub mod commands;
pub mod config;
pub mod io;
pub mod report;

use std::path::{Path, PathBuf};

pub use commands::{execute, Outcome};
pub use config::{Command, ExperimentConfig, Scenario};
pub use report::{emit_report, Report, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Compute(#[from] lpweights::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

impl CliError {
    /// 2 for bad configuration, 1 for failures while computing or writing.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

/// Runs `config` and writes its artifacts, plus `report.txt`, under the
/// configured output directory. Returns the rendered report and the
/// written paths.
pub fn run(command: Command, config: ExperimentConfig) -> Result<(String, Vec<PathBuf>), CliError> {
    let config = config.resolve(command)?;
    let outcome = execute(&config)?;
    let dir = config.out.clone().expect("resolved");
    let text = emit_report(&outcome.report);
    let mut written = write_artifacts(&dir, &outcome.artifacts)?;
    written.extend(write_artifacts(&dir, &[("report.txt".into(), text.clone().into_bytes())])?);
    Ok((text, written))
}

fn write_artifacts(dir: &Path, artifacts: &[(String, Vec<u8>)]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir)?;
    artifacts
        .iter()
        .map(|(name, bytes)| {
            let path = dir.join(name);
            std::fs::write(&path, bytes)?;
            Ok(path)
        })
        .collect()
}
