use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("incomparable code vectors: {0}")]
    IncomparableCodes(String),

    #[error("the gallery is empty")]
    EmptyModel,

    #[error("malformed {what}: {reason}")]
    Format { what: &'static str, reason: String },

    #[error("manifest row {row}: {reason}")]
    ManifestRow { row: usize, reason: String },

    #[error("{}: {source}", path.display())]
    Path {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Format {
            what,
            reason: reason.into(),
        }
    }

    /// Attaches the offending file path to an error.
    pub fn at_path(self, path: impl Into<PathBuf>) -> Self {
        Error::Path {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad input data or arguments rather than the
    /// environment.
    pub fn is_input_error(&self) -> bool {
        match self {
            Error::Path { source, .. } => source.is_input_error(),
            Error::Io(e) => matches!(
                e.kind(),
                io::ErrorKind::NotFound | io::ErrorKind::InvalidData | io::ErrorKind::UnexpectedEof
            ),
            _ => true,
        }
    }
}
