use std::path::{Path, PathBuf};

use popdyn::{AnalysisError, IngestError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Input {
        path: PathBuf,
        #[source]
        source: IngestError,
    },
    #[error("analysis failed: {0}")]
    Analysis(#[from] AnalysisError),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn input(path: &Path, source: IngestError) -> Self {
        match source {
            IngestError::Io(e) => CliError::io(path, e),
            other => CliError::Input {
                path: path.to_owned(),
                source: other,
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Input { .. } => 3,
            CliError::Analysis(_) => 4,
        }
    }
}
