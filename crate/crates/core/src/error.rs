use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("tag {tag} is outside the universe of {universe} tags")]
    TagOutOfRange { tag: usize, universe: usize },

    #[error("invalid requirements: {0}")]
    InvalidRequirements(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("{what} too large: {size} exceeds the cap of {cap}")]
    TooLarge {
        what: &'static str,
        size: u128,
        cap: u128,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("simplex stalled after {iterations} iterations ({diagnostics})")]
    SolverStall {
        iterations: usize,
        diagnostics: String,
    },

    #[error("parse error at {locus}: {message}")]
    Parse { locus: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(locus: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            locus: locus.into(),
            message: message.into(),
        }
    }
}
