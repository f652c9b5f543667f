//! CLI error with the exit-code discipline: 2 config/usage, 3 degenerate
//! scenario, 4 I/O.

use thiserror::Error;

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Degenerate(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

impl From<rfmap_core::Error> for CliError {
    fn from(e: rfmap_core::Error) -> Self {
        use rfmap_core::Error as E;
        match e {
            E::DegenerateScenario { .. } | E::DegenerateSites { .. } => {
                CliError::Degenerate(e.to_string())
            }
            E::Io(_) | E::Json(_) | E::RecordParse { .. } => CliError::Io(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
