use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use wordrefit_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    UnknownToken,
    BadQuery,
    ZeroVector,
    Conflict,
    Io,
    BadRequest,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::UnknownToken => StatusCode::NOT_FOUND,
            ErrorCode::BadQuery | ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
            ErrorCode::ZeroVector => StatusCode::UNPROCESSABLE_ENTITY,
            ErrorCode::Conflict => StatusCode::CONFLICT,
            ErrorCode::Io => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        ApiError { code, message: message.into(), detail: None }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn bad_query(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadQuery, message)
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadRequest, message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Conflict, message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::Io, message)
    }
}

/// The code every library error surfaces as.
pub fn code_for(err: &Error) -> ErrorCode {
    match err {
        Error::UnknownToken(_) => ErrorCode::UnknownToken,
        Error::BadQuery(_) | Error::TooFewTokens => ErrorCode::BadQuery,
        Error::ZeroVector(_) | Error::ZeroComposite => ErrorCode::ZeroVector,
        Error::EmptyLog | Error::LineageMismatch(_) | Error::StaleRevision { .. } => ErrorCode::Conflict,
        Error::DuplicateTerm(_)
        | Error::TargetInGroup(_)
        | Error::InvalidRefit(_)
        | Error::ZeroDenominator(_)
        | Error::DimensionMismatch { .. } => ErrorCode::BadRequest,
        Error::Io(_)
        | Error::Json(_)
        | Error::MalformedHeader(_)
        | Error::EmptyModel
        | Error::DuplicateToken(_)
        | Error::InvalidToken(_)
        | Error::TruncatedPayload { .. }
        | Error::InconsistentColumns { .. }
        | Error::NonNumeric { .. }
        | Error::NonFinite(_) => ErrorCode::Io,
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let detail = match &err {
            Error::UnknownToken(t)
            | Error::DuplicateTerm(t)
            | Error::TargetInGroup(t)
            | Error::ZeroVector(t)
            | Error::ZeroDenominator(t) => Some(t.clone()),
            _ => None,
        };
        ApiError {
            code: code_for(&err),
            message: err.to_string(),
            detail,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}
