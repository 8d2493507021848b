//! Command-line front end: runs the evaluation pipeline on a dataset file
//! and writes reports and charts.

pub mod args;
pub mod output;
pub mod pipeline;
pub mod svg;

use thiserror::Error;

/// Errors carry the process exit code they map to.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Degenerate(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Degenerate(_) => "degenerate",
            CliError::Io(_) => "io",
        }
    }

    /// `error[<kind>]: <message>` on a single line.
    pub fn one_line(&self) -> String {
        let msg = self.to_string().replace(['\n', '\r'], " ");
        format!("error[{}]: {}", self.kind(), msg)
    }
}
