use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use dspace_core::explorer::LayoutError;
use dspace_core::model::{ConfigError, FilterError};
use dspace_core::pipeline::PipelineError;
use dspace_core::store::StoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ErrorCode {
    BadRequest,
    NotFound,
    ProviderFailure,
    Integrity,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::ProviderFailure => StatusCode::BAD_GATEWAY,
            ErrorCode::Integrity => StatusCode::UNPROCESSABLE_ENTITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            detail: None,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadRequest, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::NotFound, message)
    }

    #[must_use]
    pub fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = Some(detail);
        self
    }
}

impl std::fmt::Display for ApiError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}: {}", self.code, self.message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let code = match &e {
            StoreError::UnknownSpace(_)
            | StoreError::UnknownNode { .. }
            | StoreError::UnknownBlock(_) => ErrorCode::NotFound,
            StoreError::InvalidDocument(_) | StoreError::Format(_) | StoreError::Version { .. } => {
                ErrorCode::BadRequest
            }
            StoreError::Io(io) if io.kind() == std::io::ErrorKind::NotFound => ErrorCode::NotFound,
            StoreError::Io(_) => ErrorCode::BadRequest,
            StoreError::Integrity(_) => ErrorCode::Integrity,
        };
        ApiError::new(code, e.to_string())
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        match &e {
            PipelineError::UnknownNode(_) => ApiError::not_found(e.to_string()),
            PipelineError::DimensionStage { .. } | PipelineError::Exhausted(_) => {
                let detail = match &e {
                    PipelineError::Exhausted(x) => serde_json::to_value(x).ok(),
                    _ => None,
                };
                let err = ApiError::new(ErrorCode::ProviderFailure, e.to_string());
                match detail {
                    Some(d) => err.with_detail(d),
                    None => err,
                }
            }
            _ => ApiError::bad_request(e.to_string()),
        }
    }
}

impl From<FilterError> for ApiError {
    fn from(e: FilterError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<LayoutError> for ApiError {
    fn from(e: LayoutError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

impl From<ConfigError> for ApiError {
    fn from(e: ConfigError) -> Self {
        ApiError::bad_request(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dspace_core::model::SpaceId;

    #[test]
    fn codes_serialize_in_camel_case() {
        let e = ApiError::from(StoreError::UnknownSpace(SpaceId(9)));
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v["code"], "notFound");
        assert_eq!(e.code.status(), StatusCode::NOT_FOUND);
        let e = ApiError::from(StoreError::Integrity("x".into()));
        assert_eq!(serde_json::to_value(&e).unwrap()["code"], "integrity");
        let e = ApiError::from(PipelineError::EmptyPrompt);
        assert_eq!(e.code, ErrorCode::BadRequest);
    }
}
