use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, FromRequest, Path, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use elicit_core::{Condition, Justification, Taxonomy};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ServiceError};
use crate::project::{CorpusUpload, GoldQuestion};
use crate::workbench::{CreateProject, Workbench};

/// Corpus uploads of a full review dump can be large.
const BODY_LIMIT: usize = 256 * 1024 * 1024;

/// `Json` whose rejections use the service error shape.
pub struct ApiJson<T>(pub T);

impl<S, T> FromRequest<S> for ApiJson<T>
where
    Json<T>: FromRequest<S, Rejection = JsonRejection>,
    S: Send + Sync,
{
    type Rejection = ServiceError;

    async fn from_request(req: Request, state: &S) -> Result<Self> {
        Json::<T>::from_request(req, state)
            .await
            .map(|Json(v)| ApiJson(v))
            .map_err(|e| ServiceError::InvalidArgument(e.body_text()))
    }
}

type AppState = Arc<Workbench>;

/// Runs a workbench call off the async executor; calls may touch disk.
async fn blocking<T, F>(state: AppState, f: F) -> Result<T>
where
    F: FnOnce(&Workbench) -> Result<T> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(move || f(&state))
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))?
}

fn condition(tag: &str) -> Result<Condition> {
    tag.parse()
        .map_err(|_| ServiceError::InvalidArgument(format!("unknown condition {tag:?}")))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SampleRequest {
    pub m: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionRequest {
    pub worker: String,
    #[serde(default)]
    pub condition: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QualificationRequest {
    pub answers: Vec<Justification>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GoldRequest {
    pub questions: Vec<GoldQuestion>,
}

/// The body is optional here.
async fn create_project(State(s): State<AppState>, body: Bytes) -> Result<Response> {
    let req: CreateProject = if body.iter().all(u8::is_ascii_whitespace) {
        CreateProject::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| ServiceError::InvalidArgument(e.to_string()))?
    };
    let summary = blocking(s, move |wb| wb.create_project(req)).await?;
    Ok((StatusCode::CREATED, Json(summary)).into_response())
}

async fn list_projects(State(s): State<AppState>) -> Json<Vec<String>> {
    Json(s.project_ids())
}

async fn get_project(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response> {
    Ok(Json(blocking(s, move |wb| wb.summary(&id)).await?).into_response())
}

async fn upload_corpus(
    State(s): State<AppState>,
    Path(id): Path<String>,
    ApiJson(upload): ApiJson<CorpusUpload>,
) -> Result<Response> {
    Ok(Json(blocking(s, move |wb| wb.upload_corpus(&id, upload)).await?).into_response())
}

async fn sample(
    State(s): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<SampleRequest>,
) -> Result<Response> {
    Ok(Json(blocking(s, move |wb| wb.request_sample(&id, req.m, req.seed)).await?).into_response())
}

async fn set_gold(
    State(s): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<GoldRequest>,
) -> Result<Response> {
    let n = blocking(s, move |wb| wb.set_gold(&id, req.questions)).await?;
    Ok(Json(serde_json::json!({ "questions": n })).into_response())
}

async fn open_session(
    State(s): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<SessionRequest>,
) -> Result<Response> {
    let cond = req.condition.as_deref().map(condition).transpose()?;
    let session = blocking(s, move |wb| wb.open_session(&id, &req.worker, cond)).await?;
    Ok((StatusCode::CREATED, Json(session)).into_response())
}

async fn get_session(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response> {
    Ok(Json(blocking(s, move |wb| wb.session(&id)).await?).into_response())
}

async fn next_task(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response> {
    Ok(Json(blocking(s, move |wb| wb.next_task(&id)).await?).into_response())
}

async fn qualification(
    State(s): State<AppState>,
    Path(id): Path<String>,
    ApiJson(req): ApiJson<QualificationRequest>,
) -> Result<Response> {
    Ok(Json(blocking(s, move |wb| wb.check_qualification(&id, req.answers)).await?).into_response())
}

async fn taxonomy(
    State(s): State<AppState>,
    Path(id): Path<String>,
    ApiJson(t): ApiJson<Taxonomy>,
) -> Result<Response> {
    let revision = blocking(s, move |wb| wb.submit_taxonomy(&id, t)).await?;
    Ok(Json(serde_json::json!({ "revision": revision })).into_response())
}

async fn justification(
    State(s): State<AppState>,
    Path(id): Path<String>,
    ApiJson(j): ApiJson<Justification>,
) -> Result<Response> {
    let submission = blocking(s, move |wb| wb.submit_justification(&id, j)).await?;
    Ok((StatusCode::CREATED, Json(submission)).into_response())
}

async fn evaluate(State(s): State<AppState>, Path((id, tag)): Path<(String, String)>) -> Result<Response> {
    let cond = condition(&tag)?;
    Ok(Json(blocking(s, move |wb| wb.compile_and_evaluate(&id, cond)).await?).into_response())
}

async fn get_model(State(s): State<AppState>, Path((id, tag)): Path<(String, String)>) -> Result<Response> {
    let cond = condition(&tag)?;
    Ok(Json(blocking(s, move |wb| wb.model(&id, cond)).await?).into_response())
}

async fn repository(State(s): State<AppState>, Path(id): Path<String>) -> Result<Response> {
    let doc = blocking(s, move |wb| wb.export_repository(&id)).await?;
    Ok(([(header::CONTENT_TYPE, "application/json")], doc).into_response())
}

async fn not_found() -> ServiceError {
    ServiceError::NotFound("route".into())
}

pub fn router(workbench: Arc<Workbench>) -> Router {
    Router::new()
        .route("/projects", post(create_project).get(list_projects))
        .route("/projects/{id}", get(get_project))
        .route("/projects/{id}/corpus", post(upload_corpus))
        .route("/projects/{id}/sample", post(sample))
        .route("/projects/{id}/gold", post(set_gold))
        .route("/projects/{id}/sessions", post(open_session))
        .route("/projects/{id}/models/{condition}", get(get_model))
        .route("/projects/{id}/models/{condition}/evaluate", post(evaluate))
        .route("/projects/{id}/repository", get(repository))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/next-task", get(next_task))
        .route("/sessions/{id}/qualification", post(qualification))
        .route("/sessions/{id}/taxonomy", post(taxonomy))
        .route("/sessions/{id}/justifications", post(justification))
        .fallback(not_found)
        .layer(DefaultBodyLimit::max(BODY_LIMIT))
        .with_state(workbench)
}
