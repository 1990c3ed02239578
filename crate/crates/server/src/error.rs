use axum::extract::rejection::JsonRejection;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use acoa_core::{Error, Issue};

/// Every error response body: `{code, message, issues?}`.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub issues: Option<Vec<Issue>>,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                code: code.to_owned(),
                message: message.into(),
                issues: None,
            },
        }
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "unauthorized", "a valid bearer token is required")
    }
}

fn status_for(err: &Error) -> StatusCode {
    match err {
        Error::InvalidWork(_)
        | Error::InvalidAbout(_)
        | Error::DanglingMediaRef { .. }
        | Error::InvalidCount(_)
        | Error::Unsluggable(_)
        | Error::EmptyChronology
        | Error::EmptyBlob
        | Error::KindMismatch { .. }
        | Error::WeakPassword { .. }
        | Error::InvalidUsername => StatusCode::UNPROCESSABLE_ENTITY,
        Error::NotFound { .. } => StatusCode::NOT_FOUND,
        Error::ConfirmationRequired
        | Error::TruncationRefused { .. }
        | Error::UsernameTaken(_)
        | Error::AlreadySeeded(_) => StatusCode::CONFLICT,
        Error::InvalidCredentials | Error::Unauthorized => StatusCode::UNAUTHORIZED,
        Error::NotARepository(_)
        | Error::AlreadyInitialized(_)
        | Error::CorruptArchive(_)
        | Error::VersionUnsupported(_)
        | Error::Malformed(_)
        | Error::Io { .. } => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let status = status_for(&err);
        if status == StatusCode::INTERNAL_SERVER_ERROR {
            tracing::error!(error = %err, "request failed");
        }
        let issues = match &err {
            Error::DanglingMediaRef { path, id } => Some(vec![Issue {
                code: "dangling_media_ref".into(),
                path: path.clone(),
                message: format!("media {id} is not stored"),
            }]),
            other => other.report().map(|r| r.issues.clone()),
        };
        ApiError {
            status,
            body: ErrorBody {
                code: err.code().to_owned(),
                message: err.to_string(),
                issues,
            },
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rejection: JsonRejection) -> Self {
        let (status, code) = match &rejection {
            JsonRejection::JsonDataError(_) => (StatusCode::UNPROCESSABLE_ENTITY, "invalid_payload"),
            JsonRejection::JsonSyntaxError(_) => (StatusCode::BAD_REQUEST, "malformed_json"),
            JsonRejection::MissingJsonContentType(_) => {
                (StatusCode::UNSUPPORTED_MEDIA_TYPE, "unsupported_media_type")
            }
            _ => (StatusCode::BAD_REQUEST, "bad_request"),
        };
        ApiError::new(status, code, rejection.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
