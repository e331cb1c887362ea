use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid parameters or configuration. `key` names the offending input.
    #[error("invalid `{key}`: {message}")]
    Config { key: String, message: String },

    /// An operation was applied to a field in the wrong representation, or
    /// to fields on mismatched grids.
    #[error("usage error: {0}")]
    Usage(String),

    /// A quantity could not be evaluated (zero power, undefined group velocity...).
    #[error("{0}")]
    Domain(String),

    #[error("unsupported file format in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Format { .. } => 1,
            _ => 2,
        }
    }
}
