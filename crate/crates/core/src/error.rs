use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or document failed validation.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("unsupported format `{0}`")]
    UnsupportedFormat(String),

    /// Some edges of the coupling map cannot be reached by any chain layout.
    #[error("{} edge(s) of `{map}` cannot be covered by a {chain}-qubit chain: {edges:?}", edges.len())]
    Uncoverable {
        map: String,
        chain: usize,
        edges: Vec<(usize, usize)>,
    },

    #[error("executor failure: {0}")]
    Executor(String),

    /// Externally produced data does not match what was exported.
    #[error("{}: {reason}", file.display())]
    Import { file: PathBuf, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
