//! JSON HTTP API over the [`Engine`].

use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use super::engine::{CreateSession, Engine, EngineError, TurnRequest};
use super::survey::SurveyAnswers;
use crate::metrics::SurveyPhase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApiCode {
    BadRequest,
    NotFound,
    Conflict,
    Busy,
    UpstreamFailed,
    Unauthorized,
    Internal,
}

impl ApiCode {
    pub fn status(self) -> StatusCode {
        match self {
            ApiCode::BadRequest => StatusCode::BAD_REQUEST,
            ApiCode::NotFound => StatusCode::NOT_FOUND,
            ApiCode::Conflict | ApiCode::Busy => StatusCode::CONFLICT,
            ApiCode::UpstreamFailed => StatusCode::BAD_GATEWAY,
            ApiCode::Unauthorized => StatusCode::UNAUTHORIZED,
            ApiCode::Internal => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ApiCode,
    pub message: String,
    pub retryable: bool,
}

impl ApiError {
    pub fn new(code: ApiCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            retryable: matches!(code, ApiCode::Busy | ApiCode::UpstreamFailed),
        }
    }
}

impl From<EngineError> for ApiError {
    fn from(e: EngineError) -> Self {
        let code = match &e {
            EngineError::BadRequest(_) => ApiCode::BadRequest,
            EngineError::NotFound(_) => ApiCode::NotFound,
            EngineError::Conflict(_) => ApiCode::Conflict,
            EngineError::Busy(_) => ApiCode::Busy,
            EngineError::Upstream(_) => ApiCode::UpstreamFailed,
            EngineError::Store(_) | EngineError::ReplayDiverged { .. } => ApiCode::Internal,
        };
        if code == ApiCode::Internal {
            tracing::error!(error = %e, "request failed");
        }
        ApiError::new(code, e.to_string())
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        ApiError::new(ApiCode::BadRequest, e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

#[derive(Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub token: Option<String>,
}

/// Runs blocking engine work off the async executor.
async fn blocking<T, F>(engine: &Arc<Engine>, f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce(&Engine) -> Result<T, EngineError> + Send + 'static,
{
    let engine = engine.clone();
    tokio::task::spawn_blocking(move || f(&engine))
        .await
        .map_err(|e| ApiError::new(ApiCode::Internal, e.to_string()))?
        .map_err(ApiError::from)
}

async fn require_token(State(state): State<AppState>, request: Request, next: Next) -> Response {
    if let Some(token) = &state.token {
        let presented = request
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if presented != Some(token.as_str()) {
            return ApiError::new(ApiCode::Unauthorized, "missing or wrong bearer token").into_response();
        }
    }
    next.run(request).await
}

async fn healthz() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn create_session(
    State(state): State<AppState>,
    body: Result<Json<CreateSession>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(req) = body?;
    let created = blocking(&state.engine, move |e| e.create_session(req)).await?;
    Ok((StatusCode::CREATED, Json(created)))
}

async fn post_turn(
    State(state): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<TurnRequest>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let Json(req) = body?;
    let outcome = blocking(&state.engine, move |e| e.post_turn(&id, &req)).await?;
    Ok(Json(outcome))
}

async fn end_conversation(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let ended = blocking(&state.engine, move |e| e.end_conversation(&id)).await?;
    Ok(Json(ended))
}

async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<impl IntoResponse> {
    let view = blocking(&state.engine, move |e| e.session_view(&id)).await?;
    Ok(Json(view))
}

async fn submit_survey(
    State(state): State<AppState>,
    Path((id, phase)): Path<(String, String)>,
    body: Result<Json<SurveyAnswers>, JsonRejection>,
) -> ApiResult<impl IntoResponse> {
    let phase = match phase.as_str() {
        "pre" => SurveyPhase::Pre,
        "post" => SurveyPhase::Post,
        other => return Err(ApiError::new(ApiCode::NotFound, format!("no survey phase {other:?}"))),
    };
    let Json(answers) = body?;
    blocking(&state.engine, move |e| e.submit_survey(&id, phase, &answers)).await?;
    Ok(Json(serde_json::json!({ "status": "recorded", "phase": phase })))
}

async fn metrics_summary(State(state): State<AppState>) -> ApiResult<impl IntoResponse> {
    let summary = blocking(&state.engine, |e| Ok(e.metrics_summary())).await?;
    Ok(Json(summary))
}

const PLACEHOLDER: &str = "<!doctype html><title>EDEN</title><p>No client bundle is configured. Set <code>static_dir</code> to serve one here.</p>\n";

async fn placeholder() -> Html<&'static str> {
    Html(PLACEHOLDER)
}

pub fn router(state: AppState, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/turns", post(post_turn))
        .route("/sessions/{id}/end-conversation", post(end_conversation))
        .route("/sessions/{id}/surveys/{phase}", post(submit_survey))
        .route("/metrics/summary", get(metrics_summary))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    let app = match static_dir {
        Some(dir) => Router::new().nest_service("/app", ServeDir::new(dir)),
        None => Router::new().route("/app", get(placeholder)).route("/app/", get(placeholder)),
    };
    Router::new()
        .route("/healthz", get(healthz))
        .nest("/api", api)
        .merge(app)
        .with_state(state)
}

/// Binds and serves until ctrl-c.
pub async fn serve(state: AppState, bind: &str, static_dir: Option<PathBuf>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(state, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
