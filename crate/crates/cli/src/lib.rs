//! Command-line driver: configuration, subcommands and output files.

pub mod commands;
pub mod config;
pub mod output;

use serde_json::json;

/// Failure of a subcommand, mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Check(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Check(_) | CliError::Runtime(_) => 1,
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self {
            CliError::Usage(_) => "usage",
            CliError::Check(_) => "check",
            CliError::Runtime(_) => "runtime",
        };
        json!({ "error": kind, "message": self.to_string(), "exit_code": self.exit_code() })
    }
}

impl From<loc1d::Error> for CliError {
    fn from(e: loc1d::Error) -> Self {
        match e {
            loc1d::Error::InvalidParameter(m) => CliError::Usage(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
