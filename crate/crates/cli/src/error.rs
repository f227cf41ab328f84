use std::fmt;

use defvec::Error;

/// Exit 2 for bad input or configuration, 3 for failures during the work.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Runtime(_) => "runtime",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }

    /// `error kind=<kind> message="<escaped>"` on a single line.
    pub fn line(&self) -> String {
        format!("error kind={} message={:?}", self.kind(), self.message())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Io { .. }
            | Error::Shape(_)
            | Error::OutOfVocabulary(_)
            | Error::UndefinedCorrelation(_) => CliError::Runtime(message),
            Error::Parse { .. }
            | Error::NoDefinition(_)
            | Error::ReservedToken(_)
            | Error::Image { .. }
            | Error::BadMagic
            | Error::Version { .. }
            | Error::Malformed(_)
            | Error::Empty(_)
            | Error::DuplicateWord(_)
            | Error::InvalidArgument(_) => CliError::Validation(message),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
