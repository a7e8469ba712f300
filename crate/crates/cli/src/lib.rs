//! Front end for the `pilot_ofdm` model: configuration layering, command
//! bodies and CSV rendering. The `pilot-ofdm` binary is a thin wrapper
//! around [`cli::execute`].

use std::fmt;

pub mod cli;
pub mod commands;
pub mod config;
pub mod output;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or an unknown preset.
    Usage(String),
    /// Unreadable or malformed configuration.
    Parse(String),
    /// Parameters rejected by the model.
    Validation(pilot_ofdm::Error),
    /// A computation failed after the configuration was accepted.
    Runtime(pilot_ofdm::Error),
    Io(std::io::Error),
}

impl CliError {
    /// Process exit status: 1 for configuration problems, 2 for failures
    /// during a run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) | CliError::Validation(_) => 1,
            CliError::Runtime(_) | CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Parse(m) => write!(f, "configuration error: {m}"),
            CliError::Validation(e) => write!(f, "invalid parameters: {e}"),
            CliError::Runtime(e) => write!(f, "run failed: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<pilot_ofdm::Error> for CliError {
    fn from(e: pilot_ofdm::Error) -> Self {
        CliError::Runtime(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}
