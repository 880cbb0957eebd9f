//! Batch pipelines over `unigraph`: build, verify, calibrate and export,
//! configured by JSON or flags, with byte-reproducible reports.
//!
//! Exit status: 0 when every asserted bound holds, 1 when one fails (or
//! a construction step cannot certify itself), 2 for configuration
//! errors, 3 for I/O errors.

pub mod checks;
mod commands;
pub mod config;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{Command, GlueSetting, Params, RunConfig, Target};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

/// Result of a pipeline run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    commands::dispatch(cfg)
}

/// Exit status for a finished run.
pub fn exit_code(result: &Result<Outcome, CliError>) -> i32 {
    match result {
        Ok(o) if o.passed => 0,
        Ok(_) => 1,
        Err(e) => e.exit_code(),
    }
}
