use ffopt::lp_solver::SolveStatus;
use thiserror::Error;

/// Failure of one subcommand, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Output(String),
    #[error("{0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Output(_) => 4,
            CliError::Solver(_) => 5,
        }
    }

    /// Non-optimal solver statuses; `None` for optimal.
    pub fn from_status(status: SolveStatus) -> Option<Self> {
        match status {
            SolveStatus::Optimal => None,
            SolveStatus::Infeasible | SolveStatus::Unbounded => Some(CliError::Infeasible(
                format!("solver finished with status {status}"),
            )),
            SolveStatus::IterationLimit | SolveStatus::NumericalFailure => Some(CliError::Solver(
                format!("solver finished with status {status}"),
            )),
        }
    }
}

impl From<ffopt::Error> for CliError {
    fn from(e: ffopt::Error) -> Self {
        match e {
            ffopt::Error::Io(_) | ffopt::Error::Export(_) => CliError::Output(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
