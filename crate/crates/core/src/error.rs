use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("repository snapshot unavailable: {0}")]
    SnapshotUnavailable(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("record {index}: field `{field}`: {message}")]
    MalformedRecord {
        index: usize,
        field: String,
        message: String,
    },

    #[error("pull request {id}: {message}")]
    InvalidPullRequest { id: String, message: String },

    #[error("duplicate pull request id {0}")]
    DuplicateId(String),

    #[error("unknown pull request {0}")]
    UnknownPullRequest(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {message}")]
    PatternFile {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("empty sample")]
    EmptySample,

    #[error("degenerate variance")]
    DegenerateVariance,

    #[error("metric undefined over an empty instance list")]
    UndefinedMetric,

    #[error("instance {0} has an empty ground truth")]
    EmptyTruth(usize),

    #[error("rankings and truths differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("git: {0}")]
    Git(#[from] git2::Error),
}
