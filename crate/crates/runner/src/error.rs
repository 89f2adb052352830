use thiserror::Error;

/// Errors of the runner. Config errors map to exit code 2.
#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] heatlab::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("fuzz seed {seed}, sample {index}: {reason}")]
    Generation { seed: u64, index: usize, reason: String },
}

pub type RunResult<T> = Result<T, RunError>;
