use std::io;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure surfaced by the core crate.
///
/// Each variant maps to a stable machine code (see [`Error::code`]) which the
/// HTTP layer and the CLI print verbatim.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("work failed validation with {} issue(s)", .0.issues.len())]
    InvalidWork(ValidationReport),
    #[error("about content failed validation with {} issue(s)", .0.issues.len())]
    InvalidAbout(ValidationReport),
    #[error("media reference {id} at {path} does not resolve to a stored asset")]
    DanglingMediaRef { path: String, id: String },
    #[error("{what} not found")]
    NotFound { what: String },
    #[error("deletion requires explicit confirmation")]
    ConfirmationRequired,
    #[error("shrinking from {current} to {requested} phases drops content; pass allow_truncation to proceed")]
    TruncationRefused { current: usize, requested: i64 },
    #[error("phase count must be at least 1, got {0}")]
    InvalidCount(i64),
    #[error("no alphanumeric character survives in {0:?}")]
    Unsluggable(String),
    #[error("chronology has no phases")]
    EmptyChronology,
    #[error("media blob is empty")]
    EmptyBlob,
    #[error("content type {content_type:?} is not valid for kind {kind}")]
    KindMismatch { kind: String, content_type: String },
    #[error("{0} is not an initialized repository")]
    NotARepository(String),
    #[error("{0} already holds a repository or other files")]
    AlreadyInitialized(String),
    #[error("fixture works are already present: {0}")]
    AlreadySeeded(String),
    #[error("archive is corrupt: {0}")]
    CorruptArchive(String),
    #[error("unsupported format version {0:?}")]
    VersionUnsupported(String),
    #[error("username {0:?} is already registered")]
    UsernameTaken(String),
    #[error("password must be at least {min} characters")]
    WeakPassword { min: usize },
    #[error("invalid username")]
    InvalidUsername,
    #[error("invalid username or password")]
    InvalidCredentials,
    #[error("missing, expired or unknown session token")]
    Unauthorized,
    #[error("stored data is malformed: {0}")]
    Malformed(String),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidWork(_) => "invalid_work",
            Error::InvalidAbout(_) => "invalid_about",
            Error::DanglingMediaRef { .. } => "dangling_media_ref",
            Error::NotFound { .. } => "not_found",
            Error::ConfirmationRequired => "confirmation_required",
            Error::TruncationRefused { .. } => "truncation_refused",
            Error::InvalidCount(_) => "invalid_count",
            Error::Unsluggable(_) => "unsluggable",
            Error::EmptyChronology => "empty_chronology",
            Error::EmptyBlob => "empty_blob",
            Error::KindMismatch { .. } => "kind_mismatch",
            Error::NotARepository(_) => "not_a_repository",
            Error::AlreadyInitialized(_) => "already_initialized",
            Error::AlreadySeeded(_) => "already_seeded",
            Error::CorruptArchive(_) => "corrupt_archive",
            Error::VersionUnsupported(_) => "version_unsupported",
            Error::UsernameTaken(_) => "username_taken",
            Error::WeakPassword { .. } => "weak_password",
            Error::InvalidUsername => "invalid_username",
            Error::InvalidCredentials => "invalid_credentials",
            Error::Unauthorized => "unauthorized",
            Error::Malformed(_) => "malformed_data",
            Error::Io { .. } => "io_failure",
        }
    }

    /// The validation report carried by `invalid_work` / `invalid_about`.
    pub fn report(&self) -> Option<&ValidationReport> {
        match self {
            Error::InvalidWork(r) | Error::InvalidAbout(r) => Some(r),
            _ => None,
        }
    }

    pub(crate) fn not_found(what: impl Into<String>) -> Self {
        Error::NotFound { what: what.into() }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
