use std::path::PathBuf;

/// Errors raised by the library. CLI exit codes are derived from [`Error::exit_code`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("game has no potential representation")]
    NoPotential,
    #[error("game is not a potential game: {0}")]
    NotPotential(String),
    #[error("regularizer domain error: {0}")]
    Domain(String),
    #[error("bisection did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergent { iterations: usize, residual: f64 },
    #[error("construction error: {0}")]
    Construction(String),
    #[error("snake search exhausted its budget of {budget} nodes without a path of length {needed}")]
    BudgetExhausted { budget: u64, needed: usize },
    #[error("invalid snake: {0}")]
    InvalidSnake(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("engine error at round {round}: {source} (last checkpoint: {checkpoint:?})")]
    Engine {
        round: u64,
        checkpoint: Option<PathBuf>,
        #[source]
        source: Box<Error>,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// 2 for configuration problems, 3 for engine failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Engine { .. }
            | Error::NonConvergent { .. }
            | Error::Domain(_)
            | Error::BudgetExhausted { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
