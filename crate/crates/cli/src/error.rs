use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes. Every error maps to exactly one of these.
pub mod exit {
    pub const OK: u8 = 0;
    pub const IO_OR_PARSE: u8 = 1;
    pub const VALIDATION: u8 = 2;
    pub const SIZE_GUARD: u8 = 3;
    pub const NUMERIC: u8 = 4;
    pub const ORACLE_MISMATCH: u8 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("cannot parse {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error(transparent)]
    Core(#[from] photocount::Error),

    #[error("engine and oracle differ by {deviation:e} (tolerance {tolerance:e})")]
    OracleMismatch { deviation: f64, tolerance: f64 },

    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use photocount::Error as E;
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Argument(_) | CliError::Output(_) => {
                exit::IO_OR_PARSE
            }
            CliError::OracleMismatch { .. } => exit::ORACLE_MISMATCH,
            CliError::Core(e) => match e {
                E::Dimension(_)
                | E::PatternMismatch { .. }
                | E::Validation(_)
                | E::Cutoff { .. }
                | E::Domain(_)
                | E::WrongPath(_) => exit::VALIDATION,
                E::SizeGuard { .. } => exit::SIZE_GUARD,
                E::Conditioning(_) | E::Singular(_) | E::InvariantViolation(_) => exit::NUMERIC,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
