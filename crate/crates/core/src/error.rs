use std::path::PathBuf;

use thiserror::Error;

use crate::corpus::Finding;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed JSON. `offset` is the byte offset into the input stream.
    #[error("parse error at byte {offset} (line {line}): {message}")]
    Parse {
        offset: usize,
        line: usize,
        message: String,
    },

    #[error("{} validation error(s), first: {}", .0.len(), .0.first().map(|f| f.to_string()).unwrap_or_default())]
    Validation(Vec<Finding>),

    #[error("span {begin}..{end} belongs to both {first} and {second}")]
    MentionMultiCluster {
        begin: usize,
        end: usize,
        first: String,
        second: String,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("rule syntax error on line {line}: {message}")]
    RuleSyntax { line: usize, message: String },

    #[error("fixpoint did not converge within {0} rounds")]
    FixpointCap(usize),
}

impl Error {
    /// Short stable name of the variant, used in machine-readable output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::MentionMultiCluster { .. } => "mention_multi_cluster",
            Error::Shape(_) => "shape",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Undefined(_) => "undefined",
            Error::RuleSyntax { .. } => "rule_syntax",
            Error::FixpointCap(_) => "fixpoint_cap",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
