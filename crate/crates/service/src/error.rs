use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use moondisp_core::engine::{EngineError, FieldError, LogError};
use serde::Serialize;
use serde_json::json;

/// A failed request, rendered as `{"ok": false, "error": {...}}`.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub fields: Vec<FieldError>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            fields: Vec::new(),
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", format!("no session `{id}`"))
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let message = e.to_string();
        match e {
            EngineError::InvalidConfig(fields) => Self {
                status: StatusCode::BAD_REQUEST,
                code: "invalid_config",
                message,
                fields,
            },
            EngineError::SessionOver => Self::new(StatusCode::GONE, "session_complete", message),
            EngineError::PendingTrial { .. } => Self::new(StatusCode::CONFLICT, "trial_pending", message),
            EngineError::Sequencing { .. } => Self::new(StatusCode::CONFLICT, "out_of_sequence", message),
            EngineError::NotReady => Self::new(StatusCode::CONFLICT, "session_active", message),
            EngineError::InvalidResponse(_) => Self::new(StatusCode::BAD_REQUEST, "invalid_response", message),
            _ => Self::internal(message),
        }
    }
}

impl From<LogError> for ApiError {
    fn from(e: LogError) -> Self {
        match e {
            LogError::Engine { source, .. } => source.into(),
            other => {
                tracing::error!(error = %other, "session log failure");
                Self::internal(other.to_string())
            }
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut error = json!({ "code": self.code, "message": self.message });
        if !self.fields.is_empty() {
            error["fields"] = json!(self.fields);
        }
        (self.status, Json(json!({ "ok": false, "error": error }))).into_response()
    }
}

/// Successful body: `{"ok": true, "data": ...}`.
pub fn ok<T: Serialize>(status: StatusCode, data: T) -> Response {
    (status, Json(json!({ "ok": true, "data": data }))).into_response()
}
