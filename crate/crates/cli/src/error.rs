use std::fmt::Display;

/// Exit code for invalid input.
pub const EXIT_INVALID: u8 = 2;
/// Exit code for numerical failure (including failed checks).
pub const EXIT_NUMERIC: u8 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid {path}: {message}")]
    Invalid { path: String, message: String },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn invalid(path: &str, message: impl Display) -> Self {
        CliError::Invalid {
            path: path.to_string(),
            message: message.to_string(),
        }
    }

    pub fn numeric(message: impl Display) -> Self {
        CliError::Numeric(message.to_string())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid { .. } => EXIT_INVALID,
            CliError::Numeric(_) | CliError::Output(_) => EXIT_NUMERIC,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
