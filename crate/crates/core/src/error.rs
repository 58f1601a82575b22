use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid factorization: {0}")]
    Factorization(String),
    #[error("unsupported transform size: {0}")]
    Size(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("unresolved symbol `{0}`")]
    UnresolvedSymbol(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("export failed: {0}")]
    Export(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
