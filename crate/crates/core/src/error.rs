use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value fell outside the domain an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    /// Dempster's rule is undefined when the two bpa's conflict completely.
    #[error("total conflict: the combined evidence assigns all mass to the empty set")]
    TotalConflict,

    #[error("unknown cue \"{0}\"")]
    UnknownCue(String),

    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },

    #[error("model line {line}: {message}")]
    ModelLoad { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A statistic whose value is undefined on the given input.
    #[error("degenerate statistic: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::UnknownCue(_)
            | Error::Parse { .. }
            | Error::ModelLoad { .. }
            | Error::Config(_) => 2,
            Error::Degenerate(_) => 3,
            Error::TotalConflict | Error::Io(_) => 1,
        }
    }
}
