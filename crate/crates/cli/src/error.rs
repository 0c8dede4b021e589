use std::path::PathBuf;

use ncs_sched::design::DesignError;
use thiserror::Error;

pub const EXIT_INFEASIBLE: u8 = 2;
pub const EXIT_VERIFICATION: u8 = 3;
pub const EXIT_CONFIG: u8 = 4;
pub const EXIT_NO_GRID_POINT: u8 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("invalid config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Design(#[from] DesignError),

    #[error("cycle is not T-contractive: {0}")]
    NotContractive(String),

    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Config { .. } | CliError::Input(_) => EXIT_CONFIG,
            CliError::Write { .. } => 1,
            CliError::Design(e) => match e {
                DesignError::NoFeasibleGridPoint { .. } => EXIT_NO_GRID_POINT,
                DesignError::VerificationFailed { .. } => EXIT_VERIFICATION,
                DesignError::Mismatch { .. } => EXIT_CONFIG,
                _ => EXIT_INFEASIBLE,
            },
            CliError::NotContractive(_) => EXIT_INFEASIBLE,
            CliError::Verification(_) => EXIT_VERIFICATION,
        }
    }
}

pub fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}
