use thiserror::Error;

/// Failure of a CLI job, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{op} failed: {source}")]
    Numerical {
        op: &'static str,
        source: sphkern::Error,
    },

    #[error("{failed} of {total} validation checks failed")]
    Validation { failed: usize, total: usize },

    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } => 1,
            CliError::Config(_) | CliError::Output(_) => 2,
            CliError::Numerical { .. } => 3,
        }
    }

    pub fn config(msg: impl std::fmt::Display) -> Self {
        CliError::Config(msg.to_string())
    }
}

/// Tags a library error with the operation that raised it.
pub trait Op<T> {
    fn op(self, op: &'static str) -> Result<T, CliError>;
}

impl<T> Op<T> for sphkern::Result<T> {
    fn op(self, op: &'static str) -> Result<T, CliError> {
        self.map_err(|source| match source {
            // bad parameters and unsupported combinations come from the job
            sphkern::Error::InvalidParameter { .. } | sphkern::Error::Unsupported(_) => {
                CliError::Config(format!("{op}: {source}"))
            }
            source => CliError::Numerical { op, source },
        })
    }
}
