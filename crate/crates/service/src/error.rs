use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use slr_core::{Error, ErrorClass};

/// Body of every non-2xx response.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub details: Vec<String>,
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
                code: code.to_string(),
                message: message.into(),
                details: Vec::new(),
            },
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_input", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", message)
    }
}

fn status_of(e: &Error) -> StatusCode {
    match e {
        Error::UnknownReviewer(_) => StatusCode::UNAUTHORIZED,
        Error::StaleRevision { .. } => StatusCode::CONFLICT,
        Error::InvalidInput(_) | Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => StatusCode::BAD_REQUEST,
        Error::Rejected { .. } | Error::Precondition { .. } | Error::Profile(_) => StatusCode::UNPROCESSABLE_ENTITY,
        _ => match e.class() {
            ErrorClass::Precondition => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorClass::Io | ErrorClass::Integrity => StatusCode::INTERNAL_SERVER_ERROR,
        },
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let mut details = e.details().to_vec();
        if let Error::StaleRevision { current, .. } = &e {
            details.push(format!("current_revision={current}"));
        }
        let message = match &e {
            Error::StaleRevision { .. } => format!("{e}; refresh and retry"),
            _ => e.to_string(),
        };
        ApiError {
            status: status_of(&e),
            body: ErrorBody {
                code: e.code().to_string(),
                message,
                details,
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
