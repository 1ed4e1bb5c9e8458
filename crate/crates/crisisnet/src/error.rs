use std::io;
use std::path::PathBuf;

use crisisnet_core::ingest::IngestError;
use crisisnet_core::netgraph::GraphError;
use crisisnet_core::ngrams::NgramError;
use crisisnet_core::sentiment::SentimentError;
use crisisnet_core::topics::TopicError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value failed validation; `field` is its dotted name.
    #[error("invalid `{field}`: {message}")]
    Config { field: String, message: String },
    /// An input file exists but its contents cannot be used.
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("run manifest is missing entries: {}", .0.join(", "))]
    ManifestGaps(Vec<String>),
    #[error("{path} does not match its manifest digest")]
    DigestMismatch { path: String },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Sentiment(#[from] SentimentError),
    #[error(transparent)]
    Ngram(#[from] NgramError),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("[{stage}] {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(io::Error) -> Self {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// True for problems with the configuration or its referenced inputs,
    /// as opposed to failures while computing.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Config { .. } | Error::Format { .. } => true,
            Error::Stage { source, .. } => source.is_validation(),
            _ => false,
        }
    }

    /// Process exit status: 1 for validation errors, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.is_validation() {
            1
        } else {
            2
        }
    }
}
