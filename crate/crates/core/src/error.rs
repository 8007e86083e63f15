use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed version {0:?}")]
    MalformedVersion(String),

    #[error("malformed package document on line {line}: {reason}")]
    MalformedDocument { line: usize, reason: String },

    #[error("package {name:?} on line {line} was already defined on line {first_line}")]
    DuplicatePackage {
        name: String,
        line: usize,
        first_line: usize,
    },

    #[error("no release changes any dependency in scope {0}; cannot derive a size limit")]
    EmptyCorpus(String),

    #[error("cannot rank an empty dependency graph")]
    EmptyGraph,

    #[error("trend test needs at least {min} points, got {n}")]
    TooFewPoints { n: usize, min: usize },

    #[error("exact enumeration supports at most {max} points, got {n}")]
    SeriesTooLong { n: usize, max: usize },

    #[error("malformed manifest: {0}")]
    MalformedManifest(String),

    #[error("repository host unavailable: {0}")]
    HostUnavailable(String),

    #[error("inconsistent scenario: {0}")]
    InconsistentSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
