use std::path::PathBuf;

#[derive(thiserror::Error, Debug)]
pub enum CliError {
    #[error("{stage}: {source}")]
    Core {
        stage: &'static str,
        #[source]
        source: fuzzmark_core::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("writing CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    /// Process exit code: 2 for invalid input, 3 for I/O failures, 4 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core { source, .. } if source.is_validation() => 2,
            CliError::Core { .. } => 3,
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Csv(e) if e.is_io_error() => 3,
            CliError::Csv(_) | CliError::Internal(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Attaches the name of the pipeline stage to core errors.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for fuzzmark_core::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| CliError::Core { stage, source })
    }
}
