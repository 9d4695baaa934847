//! JSON-over-HTTP access to a review store.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{any, get, post};
use axum::{Json, Router};
use cgforge::dataset::{Candidate, Decision, DialogueRecord, ReviewAction, Status};
use cgforge::review::{ReviewError, ReviewStore};
use serde::Deserialize;
use serde_json::json;
use tower_http::services::ServeDir;

pub type SharedStore = Arc<RwLock<ReviewStore>>;

const BUILTIN_INDEX: &str = include_str!("../static/index.html");

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": {"code": self.code, "message": self.message}});
        (self.status, Json(body)).into_response()
    }
}

impl From<ReviewError> for ApiError {
    fn from(e: ReviewError) -> Self {
        match e {
            ReviewError::UnknownCandidate(id) => Self::not_found(format!("unknown candidate {id}")),
            ReviewError::InvalidDecision(m) => {
                Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_decision", m)
            }
            ReviewError::Store(s) => Self::internal(s.to_string()),
        }
    }
}

#[derive(Deserialize)]
struct ListQuery {
    status: Option<String>,
    reviewer: Option<String>,
}

#[derive(Deserialize)]
struct DecisionBody {
    reviewer: String,
    action: ReviewAction,
    #[serde(default)]
    revised_utterance: Option<String>,
}

fn poisoned<T>(_: T) -> ApiError {
    ApiError::internal("store lock poisoned")
}

async fn list(
    State(store): State<SharedStore>,
    query: Result<Query<ListQuery>, QueryRejection>,
) -> Result<Json<Vec<Candidate>>, ApiError> {
    let Query(q) = query.map_err(|e| {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_query",
            e.body_text(),
        )
    })?;
    let status = match q.status.as_deref().filter(|s| !s.is_empty()) {
        None => None,
        Some(s) => Some(Status::parse(s).ok_or_else(|| {
            ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_status",
                format!("unknown status {s:?}"),
            )
        })?),
    };
    let reviewer = q.reviewer.as_deref().filter(|r| !r.is_empty());
    let store = store.read().map_err(poisoned)?;
    Ok(Json(
        store.list(status, reviewer).into_iter().cloned().collect(),
    ))
}

async fn get_one(
    State(store): State<SharedStore>,
    Path(id): Path<String>,
) -> Result<Json<Candidate>, ApiError> {
    let store = store.read().map_err(poisoned)?;
    store
        .get(&id)
        .cloned()
        .map(Json)
        .ok_or_else(|| ApiError::not_found(format!("unknown candidate {id}")))
}

async fn decide(
    State(store): State<SharedStore>,
    Path(id): Path<String>,
    body: Result<Json<DecisionBody>, JsonRejection>,
) -> Result<Json<Candidate>, ApiError> {
    let Json(body) = body.map_err(|e| {
        ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            "invalid_decision",
            e.body_text(),
        )
    })?;
    let d = Decision {
        candidate_id: id,
        reviewer: body.reviewer,
        action: body.action,
        revised_utterance: body.revised_utterance,
        timestamp: 0,
    };
    // The append is fsynced before the response goes out.
    let updated = tokio::task::spawn_blocking(move || {
        let mut store = store.write().map_err(poisoned)?;
        store.record_decision(d).cloned().map_err(ApiError::from)
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))??;
    Ok(Json(updated))
}

async fn stats(State(store): State<SharedStore>) -> Result<impl IntoResponse, ApiError> {
    let store = store.read().map_err(poisoned)?;
    Ok(Json(store.stats()))
}

async fn export(State(store): State<SharedStore>) -> Result<Json<Vec<DialogueRecord>>, ApiError> {
    let store = store.read().map_err(poisoned)?;
    Ok(Json(store.export_benchmark()))
}

async fn unknown_api() -> ApiError {
    ApiError::not_found("no such endpoint")
}

async fn builtin_index() -> Html<&'static str> {
    Html(BUILTIN_INDEX)
}

/// The API under `/api`, plus the UI's files from `static_dir` (or a
/// built-in page pointing at the API when there is none).
pub fn router(store: SharedStore, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/candidates", get(list))
        .route("/api/candidates/{id}", get(get_one))
        .route("/api/candidates/{id}/decisions", post(decide))
        .route("/api/stats", get(stats))
        .route("/api/export", get(export))
        .route("/api", any(unknown_api))
        .route("/api/{*rest}", any(unknown_api))
        .with_state(store);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(builtin_index)),
    }
}

/// Serves until interrupted. The bound address goes to standard output as
/// one JSON line, so `--port 0` can be used.
pub async fn serve(
    store: SharedStore,
    addr: SocketAddr,
    static_dir: Option<PathBuf>,
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    println!("{}", json!({"listening": local.to_string()}));
    log::info!("review service on http://{local}");
    use std::io::Write;
    std::io::stdout().flush()?;
    axum::serve(listener, router(store, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
