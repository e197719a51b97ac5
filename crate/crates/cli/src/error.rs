use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {reason}", path.display())]
    File { path: PathBuf, reason: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Pipeline(platetrace_core::Error),

    #[error(transparent)]
    Tracker(#[from] platetrace_tracker::TrackerError),

    #[error(transparent)]
    Ingest(#[from] platetrace_ingest::IngestError),
}

impl CliError {
    pub fn file(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        Self::File {
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    /// 2 for anything that went wrong reading or writing files, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::File { .. } => 2,
            Self::Tracker(platetrace_tracker::TrackerError::Storage { .. } | platetrace_tracker::TrackerError::Corrupt { .. }) => 2,
            Self::Ingest(platetrace_ingest::IngestError::Io { .. }) => 2,
            _ => 1,
        }
    }
}

impl From<platetrace_core::Error> for CliError {
    fn from(e: platetrace_core::Error) -> Self {
        match e {
            platetrace_core::Error::UnreadableFile { path, reason } => Self::File { path, reason },
            platetrace_core::Error::Write { path, source } => Self::file(path, source),
            other => Self::Pipeline(other),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
