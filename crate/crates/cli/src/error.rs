//! Failure kinds and their process exit codes.

use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATIONS: i32 = 1;
pub const EXIT_INVALID_LOTTERY: i32 = 2;
pub const EXIT_INCOHERENT: i32 = 3;
pub const EXIT_NEGATIVE: i32 = 4;
pub const EXIT_PRECONDITION: i32 = 5;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INPUT: i32 = 65;
pub const EXIT_SOLVER: i32 = 70;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },

    #[error(transparent)]
    Core(#[from] qrdt::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qrdt::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } | CliError::Parse { .. } => EXIT_INPUT,
            CliError::Core(e) => match e {
                E::InvalidLottery(_) => EXIT_INVALID_LOTTERY,
                E::Incoherent => EXIT_INCOHERENT,
                E::UndefinedConditional { .. } | E::StateNotInDual { .. } | E::PreconditionViolated(_) => EXIT_PRECONDITION,
                E::ConvergenceFailure { .. } | E::IterationLimit { .. } | E::SolverNumericalFailure { .. } => EXIT_SOLVER,
                E::DimensionMismatch { .. }
                | E::NotHermitian { .. }
                | E::InvalidInput(_)
                | E::ZeroGamble
                | E::Range { .. }
                | E::NotColumnStochastic { .. } => EXIT_INPUT,
            },
        }
    }

    /// Short machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_USAGE => "usage",
            EXIT_INPUT => "input",
            EXIT_INVALID_LOTTERY => "invalid-lottery",
            EXIT_INCOHERENT => "incoherent",
            EXIT_PRECONDITION => "precondition",
            EXIT_SOLVER => "solver",
            _ => "error",
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
