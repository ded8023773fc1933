use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Runtime(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl HarnessError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Io { .. } | Self::Runtime(_) => 2,
            Self::Invariant(_) => 3,
        }
    }

    pub fn io(path: impl AsRef<Path>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.as_ref().to_path_buf();
        move |source| Self::Io { path, source }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Wraps any displayable error as a runtime error with context.
pub(crate) fn rt<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> HarnessError {
    let context = context.to_string();
    move |e| HarnessError::Runtime(format!("{context}: {e}"))
}

pub(crate) fn invalid<E: std::fmt::Display>(context: impl std::fmt::Display) -> impl FnOnce(E) -> HarnessError {
    let context = context.to_string();
    move |e| HarnessError::Validation(format!("{context}: {e}"))
}
