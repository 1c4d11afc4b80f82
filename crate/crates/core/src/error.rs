use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad user input or configuration, detected before any work is done.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("ingestion failed: {0}")]
    Ingest(String),

    #[error("http request to {url} failed after {attempts} attempts: {reason}")]
    Unreachable {
        url: String,
        attempts: u32,
        reason: String,
    },

    #[error("empty vocabulary after trimming (min_docs={min_docs}, min_total={min_total})")]
    EmptyVocabulary { min_docs: usize, min_total: usize },

    #[error("no document has at least two in-vocabulary tokens")]
    DegenerateCorpus,

    #[error("requested {requested} anchors but only {available} candidate terms")]
    TooFewCandidates { requested: usize, available: usize },

    #[error("invalid model input: {0}")]
    Model(String),

    #[error("unknown export format {0:?}")]
    UnknownFormat(String),

    #[error("malformed {what} at {location}: {reason}")]
    Parse {
        what: &'static str,
        location: String,
        reason: String,
    },

    #[error("missing artifact {}", .0.display())]
    MissingArtifact(PathBuf),

    #[error("{path}: {source}", path = .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(what: &'static str, location: impl Into<String>, reason: impl ToString) -> Self {
        Error::Parse {
            what,
            location: location.into(),
            reason: reason.to_string(),
        }
    }

    /// Errors the user can fix by changing inputs; the CLI maps these to exit code 2.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Stage { source, .. } => source.is_validation(),
            e => matches!(
                e,
                Error::Config(_) | Error::UnknownFormat(_) | Error::TooFewCandidates { .. }
            ),
        }
    }
}
