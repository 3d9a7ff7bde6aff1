use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use crate::session::SessionError;

/// Error body returned by every failing route: `{code, message}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: String,
    pub message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "invalid_payload", message)
    }

    pub fn not_found(what: &str, id: &str) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", format!("unknown {what} {id}"))
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> ApiError {
        let message = e.to_string();
        match e {
            SessionError::Svg(_) => ApiError::new(StatusCode::BAD_REQUEST, "invalid_svg", message),
            SessionError::Prompt(_) => ApiError::invalid(message),
            SessionError::UnknownDesign(_) | SessionError::UnknownIteration(_) => {
                ApiError::new(StatusCode::NOT_FOUND, "not_found", message)
            }
            SessionError::Edit(crate::property_sheet::EditError::StaleSource) => {
                ApiError::new(StatusCode::CONFLICT, "stale_source", message)
            }
            SessionError::Edit(_) => ApiError::new(StatusCode::BAD_REQUEST, "type_mismatch", message),
            SessionError::Schema(_) => ApiError::new(StatusCode::BAD_REQUEST, "schema_version", message),
            SessionError::Provider { .. } => ApiError::new(StatusCode::BAD_GATEWAY, "provider_error", message),
            SessionError::NoCandidates { .. } => ApiError::new(StatusCode::BAD_GATEWAY, "no_designs", message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}
