use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use elicit_core::knowledge::Violation;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("{0} not found")]
    NotFound(String),
    /// Call made out of the project or session lifecycle order.
    #[error("{0}")]
    Lifecycle(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("session {0} failed qualification and is locked")]
    SessionLocked(String),
    #[error("session {0} has not passed qualification yet")]
    QualificationPending(String),
    #[error("{found} record submitted to a {expected} session")]
    ConditionMismatch { expected: String, found: String },
    #[error("instance {0} is not in this session's queue")]
    OutOfQueue(String),
    #[error("answers missing for gold questions: {}", .0.join(", "))]
    IncompleteAnswers(Vec<String>),
    #[error("record rejected: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Rejected(Vec<Violation>),
    #[error("{0}")]
    InsufficientData(String),
    #[error("storage: {0}")]
    Storage(String),
    #[error("{0}")]
    Internal(String),
}

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::NotFound(_) => "not_found",
            ServiceError::Lifecycle(_) => "lifecycle",
            ServiceError::InvalidArgument(_) => "invalid_argument",
            ServiceError::SessionLocked(_) => "session_locked",
            ServiceError::QualificationPending(_) => "qualification_pending",
            ServiceError::ConditionMismatch { .. } => "condition_mismatch",
            ServiceError::OutOfQueue(_) => "out_of_queue",
            ServiceError::IncompleteAnswers(_) => "incomplete_answers",
            ServiceError::Rejected(_) => "validation",
            ServiceError::InsufficientData(_) => "insufficient_data",
            ServiceError::Storage(_) => "storage",
            ServiceError::Internal(_) => "internal",
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::Lifecycle(_)
            | ServiceError::QualificationPending(_)
            | ServiceError::ConditionMismatch { .. }
            | ServiceError::OutOfQueue(_) => StatusCode::CONFLICT,
            ServiceError::InvalidArgument(_) | ServiceError::IncompleteAnswers(_) => StatusCode::BAD_REQUEST,
            ServiceError::SessionLocked(_) => StatusCode::LOCKED,
            ServiceError::Rejected(_) | ServiceError::InsufficientData(_) => StatusCode::UNPROCESSABLE_ENTITY,
            ServiceError::Storage(_) | ServiceError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    pub fn body(&self) -> ErrorBody {
        ErrorBody {
            code: self.code().to_string(),
            message: self.to_string(),
            violations: match self {
                ServiceError::Rejected(v) => Some(v.clone()),
                _ => None,
            },
        }
    }
}

/// Wire shape of every error response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violations: Option<Vec<Violation>>,
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        if matches!(self, ServiceError::Storage(_) | ServiceError::Internal(_)) {
            tracing::error!("{self}");
        }
        (self.status(), Json(self.body())).into_response()
    }
}

impl From<elicit_core::Error> for ServiceError {
    fn from(e: elicit_core::Error) -> Self {
        use elicit_core::Error as E;
        match e {
            E::Rejected(v) => ServiceError::Rejected(v),
            E::InsufficientData(m) => ServiceError::InsufficientData(m),
            E::MissingInstance(id) => ServiceError::NotFound(format!("instance {id}")),
            E::Io(_) => ServiceError::Storage(e.to_string()),
            other => ServiceError::InvalidArgument(other.to_string()),
        }
    }
}
