use std::path::{Path, PathBuf};

use hsfuse_core::FusionError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: payload holds {actual} bytes, header implies {expected}", path.display())]
    Size {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Core {
        path: PathBuf,
        #[source]
        source: FusionError,
    },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    pub fn parse(path: impl AsRef<Path>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.as_ref().to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub fn format(path: impl AsRef<Path>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.as_ref().to_path_buf(),
            message: message.into(),
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Size { .. } => "size",
            Error::Format { .. } => "format",
            Error::Core { source, .. } => source.category(),
            Error::Usage(_) => "usage",
        }
    }

    /// Process exit code for this error's category.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "usage" => 2,
            "io" => 3,
            "parse" | "size" | "format" => 4,
            "shape" => 5,
            "parameter" | "config" => 6,
            "degenerate" => 7,
            "divergence" => 8,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Attaches a file path to core errors.
pub trait WithPath<T> {
    fn at(self, path: impl AsRef<Path>) -> Result<T>;
}

impl<T> WithPath<T> for hsfuse_core::Result<T> {
    fn at(self, path: impl AsRef<Path>) -> Result<T> {
        self.map_err(|source| Error::Core {
            path: path.as_ref().to_path_buf(),
            source,
        })
    }
}
