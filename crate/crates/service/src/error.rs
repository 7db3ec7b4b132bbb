use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use mariomix_core::playstyle::{CharacterizeError, SearchError};
use mariomix_core::MixError;
use serde::{Deserialize, Serialize};

/// The error body every endpoint returns: `{code, message}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> ApiError {
        ApiError {
            status,
            body: ErrorBody {
                code: code.to_string(),
                message: message.into(),
            },
        }
    }

    pub fn not_found(what: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "NotFound", what)
    }

    pub fn bad_request(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "BadRequest", message)
    }

    pub fn dataset_not_loaded() -> ApiError {
        ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "DatasetNotLoaded", "no policy dataset is loaded")
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<MixError> for ApiError {
    fn from(e: MixError) -> ApiError {
        let unprocessable = StatusCode::UNPROCESSABLE_ENTITY;
        let (status, code) = match &e {
            MixError::LevelTooNarrow { .. } => (unprocessable, "LevelTooNarrow"),
            MixError::OutOfBounds { .. } => (unprocessable, "OutOfBounds"),
            MixError::EmptyDataset => (StatusCode::SERVICE_UNAVAILABLE, "DatasetNotLoaded"),
            MixError::UnassignedSlot(_) => (unprocessable, "UnassignedSlot"),
            MixError::UnknownPolicyName(_) => (StatusCode::NOT_FOUND, "UnknownPolicyName"),
            MixError::SegmentNeverVisited(_) => (unprocessable, "SegmentNeverVisited"),
            MixError::NoSuchSegment { .. } => (StatusCode::NOT_FOUND, "NotFound"),
            MixError::SlotCountMismatch { .. } => (StatusCode::BAD_REQUEST, "SlotCountMismatch"),
            MixError::WrongLevel { .. } => (StatusCode::BAD_REQUEST, "WrongLevel"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl From<SearchError> for ApiError {
    fn from(e: SearchError) -> ApiError {
        let code = match e {
            SearchError::ZeroK => "BadRequest",
            SearchError::EmptyDatasetAfterExclusion => "EmptyDatasetAfterExclusion",
        };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string())
    }
}

impl From<CharacterizeError> for ApiError {
    fn from(e: CharacterizeError) -> ApiError {
        let code = match e {
            CharacterizeError::EmptyTrace => "EmptyTrace",
            CharacterizeError::EmptyLevels | CharacterizeError::NoRuns => "BadRequest",
        };
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, e.to_string())
    }
}
