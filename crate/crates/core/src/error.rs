use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: {message} at line {line}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("no definition for {0:?}")]
    NoDefinition(String),

    #[error("reserved token <PAD> is not allowed in {0}")]
    ReservedToken(String),

    #[error("{path}: corrupt image: {message}")]
    Image { path: PathBuf, message: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("not a defvec checkpoint")]
    BadMagic,

    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("malformed file: {0}")]
    Malformed(String),

    #[error("empty dataset: {0}")]
    Empty(String),

    #[error("duplicate word {0:?}")]
    DuplicateWord(String),

    #[error("word {0:?} is not in the embedding table")]
    OutOfVocabulary(String),

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
