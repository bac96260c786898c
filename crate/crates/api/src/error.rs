use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use brickgen_core::pipeline::PipelineError;
use brickgen_core::store::StoreError;
use serde::Serialize;

/// Error response; the body is always JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prerequisite: Option<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            prerequisite: None,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "conflict", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", self.status.as_u16(), self.code, self.message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        #[derive(Serialize)]
        struct Body<'a> {
            status: u16,
            #[serde(flatten)]
            error: &'a ApiError,
        }
        let body = Body {
            status: self.status.as_u16(),
            error: &self,
        };
        (self.status, Json(body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match &e {
            StoreError::NotFound(_) => ApiError::not_found(e.to_string()),
            StoreError::Exists(_) => ApiError::new(StatusCode::CONFLICT, "exists", e.to_string()),
            StoreError::Locked(_) => ApiError::new(StatusCode::CONFLICT, "locked", e.to_string()),
            StoreError::InvalidId(_) | StoreError::InvalidRange => ApiError::bad_request(e.to_string()),
            StoreError::Collision { .. } => ApiError::conflict(e.to_string()),
            StoreError::Io { .. } | StoreError::Parse { .. } => ApiError::internal(e.to_string()),
        }
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Missing { prerequisite, .. } => ApiError {
                prerequisite: Some(prerequisite.name().to_string()),
                ..ApiError::new(StatusCode::CONFLICT, "prerequisite", e.to_string())
            },
            PipelineError::Store(s) => s.into(),
            PipelineError::UnknownPoint(_) => ApiError::not_found(e.to_string()),
            PipelineError::UnknownClass(_)
            | PipelineError::Ingest(_)
            | PipelineError::Registry(_)
            | PipelineError::Template(_) => ApiError::bad_request(e.to_string()),
            PipelineError::Taxonomy(_) | PipelineError::Resource { .. } | PipelineError::Build(_) => {
                ApiError::internal(e.to_string())
            }
        }
    }
}
