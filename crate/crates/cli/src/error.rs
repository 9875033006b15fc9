use pulsed_squeeze::oracle::OracleError;
use pulsed_squeeze::sweep::SweepError;
use pulsed_squeeze::{ModelError, ObservableError};
use thiserror::Error;

/// Process exit codes. `0` is success.
pub mod exit {
    pub const CONFIG: i32 = 2;
    pub const BELOW_THRESHOLD: i32 = 3;
    pub const DIVERGENT: i32 = 4;
    pub const NON_CONVERGENT: i32 = 5;
    pub const NEGATIVE_DECAY: i32 = 6;
    pub const ORACLE: i32 = 7;
    pub const CHECK_FAILED: i32 = 8;
    pub const IO: i32 = 9;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Observable(#[from] ObservableError),
    #[error("{message}: {cause}")]
    Context {
        message: String,
        cause: ObservableError,
    },
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error("residual {residual:e} exceeds {limit:e} ({what})")]
    CheckFailed {
        what: String,
        residual: f64,
        limit: f64,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SweepError> for CliError {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Observable(o) => CliError::Observable(o),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn observable_code(e: &ObservableError) -> i32 {
    match e {
        ObservableError::BelowThreshold(_) => exit::BELOW_THRESHOLD,
        ObservableError::DivergentIntegral(_) => exit::DIVERGENT,
        ObservableError::NonConvergent(_) => exit::NON_CONVERGENT,
        ObservableError::NegativeDecay(_) => exit::NEGATIVE_DECAY,
        ObservableError::Model(_)
        | ObservableError::PeriodMismatch { .. }
        | ObservableError::InvalidGrid(_) => exit::CONFIG,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Observable(e) | CliError::Context { cause: e, .. } => observable_code(e),
            CliError::Oracle(OracleError::Trace(e)) => observable_code(e),
            CliError::Oracle(OracleError::InvalidTolerance(_)) => exit::CONFIG,
            CliError::Oracle(_) => exit::ORACLE,
            CliError::CheckFailed { .. } => exit::CHECK_FAILED,
            CliError::Io(_) => exit::IO,
        }
    }
}

/// Names the drive parameter responsible for a regime error.
pub(crate) fn with_hint(e: ObservableError) -> CliError {
    let message = match &e {
        ObservableError::DivergentIntegral(_) => {
            "F0 (mean drive) is at threshold; move it off 1 or use --source-mode vacuum"
        }
        ObservableError::NegativeDecay(_) => "F0 + m0 must exceed -1",
        ObservableError::BelowThreshold(_) => {
            "F0 (mean drive) must exceed 1 for a nonzero photon number"
        }
        _ => return CliError::Observable(e),
    };
    CliError::Context {
        message: message.into(),
        cause: e,
    }
}
