//! Library side of the `fmcc` command: model loading, index files, event
//! logs, alignment reports and the benchmark harness.

pub mod bench;
pub mod commands;
pub mod eventlog;
pub mod report;

use fmcc_core::index::IndexError;
use fmcc_core::model::ModelError;
use fmcc_core::protocol::ProtocolError;
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ABORT: i32 = 3;
pub const EXIT_TRANSPORT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("aborted: {0}")]
    Aborted(String),
    #[error("transport: {0}")]
    Transport(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Aborted(_) => EXIT_ABORT,
            CliError::Transport(_) => EXIT_TRANSPORT,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Input(format!("model: {e}"))
    }
}

impl From<IndexError> for CliError {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::BudgetExhausted(_) => CliError::Aborted(e.to_string()),
            other => CliError::Input(format!("index: {other}")),
        }
    }
}

impl From<eventlog::LogError> for CliError {
    fn from(e: eventlog::LogError) -> Self {
        CliError::Input(format!("log: {e}"))
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Transport(e) => CliError::Transport(e.to_string()),
            ProtocolError::UnknownLabel(_) => CliError::Input(e.to_string()),
            other => CliError::Aborted(other.to_string()),
        }
    }
}
