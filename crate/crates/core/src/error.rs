use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus contains no documents")]
    EmptyCorpus,

    #[error("word {0:?} is not in the corpus lexicon")]
    OutOfLexicon(String),

    #[error("word {0:?} has no embedding")]
    OutOfVocabulary(String),

    #[error("vocabulary is empty after applying min_count = {min_count}")]
    EmptyVocabulary { min_count: usize },

    #[error("empty word passed to {0}")]
    EmptyWord(&'static str),

    #[error("clean lexicon is empty{}", hint.as_deref().map(|h| format!(" ({h})")).unwrap_or_default())]
    EmptyCleanLexicon { hint: Option<String> },

    #[error("fewer than two embedded candidates")]
    DegenerateCandidateSet,

    #[error("node {0:?} is not covered by the partition")]
    MissingNode(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{}:{line}: {msg}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}
