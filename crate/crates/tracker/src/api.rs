//! JSON API.
//!
//! | method | path       | body / query                         | reply                  |
//! |--------|------------|--------------------------------------|------------------------|
//! | POST   | `/traces`  | `{"number","camera_id"}`             | 201, the stored record |
//! | GET    | `/traces`  | `?number=X`                          | 200, records newest first |
//! | POST   | `/watches` | `{"vehicle","email","mobile","details"}` | 201, `{"id"}`      |
//! | GET    | `/watches` |                                      | 200, watches oldest first |
//! | GET    | `/healthz` |                                      | 200                    |
//!
//! With a token configured, everything except `/healthz` and `/ui/` needs
//! `Authorization: Bearer <token>`.

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::services::ServeDir;

use crate::error::TrackerError;
use crate::model::NewWatch;
use crate::store::Tracker;

#[derive(Debug, Clone, Default)]
pub struct ApiConfig {
    pub token: Option<String>,
    /// Static files served under `/ui/`.
    pub ui_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRequest {
    pub number: String,
    pub camera_id: String,
}

#[derive(Debug, Deserialize)]
struct SearchQuery {
    number: Option<String>,
}

struct ApiError(TrackerError);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, field) = match &self.0 {
            TrackerError::Validation { field, .. } => (StatusCode::BAD_REQUEST, Some(*field)),
            TrackerError::Geo { .. } => (StatusCode::BAD_GATEWAY, None),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, None),
        };
        if status.is_server_error() {
            log::error!("{}", self.0);
        }
        (status, Json(json!({ "error": self.0.to_string(), "field": field }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Runs blocking store work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> Result<T, TrackerError> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.expect("store task panicked").map_err(ApiError)
}

async fn post_trace(State(t): State<Arc<Tracker>>, Json(req): Json<TraceRequest>) -> ApiResult<impl IntoResponse> {
    let done = blocking(move || t.ingest_trace(&req.number, &req.camera_id)).await?;
    Ok((StatusCode::CREATED, Json(done.trace)))
}

async fn get_traces(State(t): State<Arc<Tracker>>, Query(q): Query<SearchQuery>) -> ApiResult<impl IntoResponse> {
    let number = q.number.unwrap_or_default();
    Ok(Json(blocking(move || t.search(&number)).await?))
}

async fn post_watch(State(t): State<Arc<Tracker>>, Json(w): Json<NewWatch>) -> ApiResult<impl IntoResponse> {
    let stored = blocking(move || t.register_watch(w)).await?;
    Ok((StatusCode::CREATED, Json(json!({ "id": stored.id }))))
}

async fn get_watches(State(t): State<Arc<Tracker>>) -> ApiResult<impl IntoResponse> {
    Ok(Json(blocking(move || Ok(t.list_watches())).await?))
}

async fn require_token(State(token): State<Arc<String>>, req: Request, next: Next) -> Response {
    let ok = req
        .headers()
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .is_some_and(|v| v == token.as_str());
    if ok {
        next.run(req).await
    } else {
        (StatusCode::UNAUTHORIZED, Json(json!({ "error": "missing or wrong bearer token" }))).into_response()
    }
}

pub fn router(tracker: Arc<Tracker>, config: ApiConfig) -> Router {
    let mut api = Router::new()
        .route("/traces", get(get_traces).post(post_trace))
        .route("/watches", get(get_watches).post(post_watch))
        .with_state(tracker);
    if let Some(token) = config.token {
        api = api.layer(middleware::from_fn_with_state(Arc::new(token), require_token));
    }
    let mut app = Router::new().route("/healthz", get(|| async { "ok" })).merge(api);
    if let Some(dir) = config.ui_dir {
        app = app.nest_service("/ui", ServeDir::new(dir));
    }
    app
}

/// Serves until `shutdown` resolves, then finishes in-flight requests.
pub async fn serve(listener: tokio::net::TcpListener, app: Router, shutdown: impl Future<Output = ()> + Send + 'static) -> std::io::Result<()> {
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}
