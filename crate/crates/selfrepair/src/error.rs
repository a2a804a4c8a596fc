use std::io;
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: unreadable or invalid configuration, bad flags.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("interrupted; completed rows were written")]
    Interrupted,
    /// Help or version text requested; not a failure.
    #[error("{0}")]
    Help(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Io(_) => 1,
            CliError::Interrupted => 130,
            CliError::Help(_) => 0,
        })
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<selfrepair_core::Error> for CliError {
    fn from(e: selfrepair_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}
