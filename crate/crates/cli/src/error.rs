use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{location}: {key}: {message}")]
    Config {
        location: String,
        key: String,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{context}: {source}")]
    Simulation {
        context: String,
        #[source]
        source: ballistic::Error,
    },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

/// Attaches a description of the failing step to core errors.
pub trait SimContext<T> {
    fn context(self, context: impl Into<String>) -> Result<T>;
}

impl<T> SimContext<T> for ballistic::Result<T> {
    fn context(self, context: impl Into<String>) -> Result<T> {
        self.map_err(|source| CliError::Simulation {
            context: context.into(),
            source,
        })
    }
}
