//! HTTP front end: `POST /recommend` and `GET /health`.

use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use revrec_core::{PrId, Strategy};
use serde::Deserialize;
use serde_json::json;

use crate::engine::{Engine, EngineError, Query, Target};

pub const ADDR_ENV: &str = "REVREC_SERVE_ADDR";
pub const DEFAULT_ADDR: &str = "127.0.0.1:8080";

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FileField {
    Spec(String),
    Pinned { path: String, commit: Option<String> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecommendBody {
    pr_id: Option<PrId>,
    changed_files: Option<Vec<FileField>>,
    author: Option<String>,
    k: Option<usize>,
    strategy: Option<String>,
    #[serde(default)]
    refresh: bool,
}

struct BadRequest {
    field: String,
    message: String,
}

fn bad(field: &str, message: impl Into<String>) -> BadRequest {
    BadRequest {
        field: field.into(),
        message: message.into(),
    }
}

fn json_response(status: StatusCode, body: String) -> Response {
    let mut r = (status, body).into_response();
    r.headers_mut()
        .insert(header::CONTENT_TYPE, HeaderValue::from_static("application/json"));
    r
}

fn error_response(status: StatusCode, value: serde_json::Value) -> Response {
    let mut body = serde_json::to_string_pretty(&value).expect("json value serializes");
    body.push('\n');
    json_response(status, body)
}

impl IntoResponse for BadRequest {
    fn into_response(self) -> Response {
        error_response(
            StatusCode::BAD_REQUEST,
            json!({ "error": "invalid request", "field": self.field, "message": self.message }),
        )
    }
}

fn internal(error: impl std::fmt::Display) -> Response {
    let id = uuid::Uuid::new_v4();
    eprintln!("error {id}: {error}");
    error_response(
        StatusCode::INTERNAL_SERVER_ERROR,
        json!({ "error": "internal error", "id": id.to_string() }),
    )
}

fn parse_query(engine: &Engine, bytes: &[u8]) -> Result<Query, BadRequest> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let body: RecommendBody = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        bad(if path == "." { "body" } else { &path }, e.into_inner().to_string())
    })?;

    let strategy = match body.strategy.as_deref() {
        None => Strategy::Correct,
        Some(s) => Strategy::parse(s).ok_or_else(|| bad("strategy", format!("unknown strategy {s:?}")))?,
    };
    if body.k == Some(0) {
        return Err(bad("k", "must be at least 1"));
    }
    let target = match (body.pr_id, body.changed_files) {
        (Some(_), Some(_)) => return Err(bad("pr_id", "give either pr_id or changed_files, not both")),
        (None, None) => return Err(bad("pr_id", "pr_id or changed_files is required")),
        (Some(id), None) => Target::Existing(id),
        (None, Some(files)) => {
            let author = body
                .author
                .filter(|a| !a.trim().is_empty())
                .ok_or_else(|| bad("author", "required with changed_files"))?;
            if files.is_empty() {
                return Err(bad("changed_files", "must not be empty"));
            }
            let pinned = files
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    match f {
                        FileField::Spec(s) => engine.resolve_file(s),
                        FileField::Pinned { path, commit } => engine.pin_file(commit.as_deref().unwrap_or("HEAD"), path),
                    }
                    .map_err(|e| bad(&format!("changed_files[{i}]"), e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Target::New { author, files: pinned }
        }
    };
    Ok(Query {
        target,
        strategy,
        k: body.k,
        refresh: body.refresh,
    })
}

async fn recommend(State(engine): State<Arc<Engine>>, body: Bytes) -> Response {
    let task = tokio::task::spawn_blocking(move || {
        let query = match parse_query(&engine, &body) {
            Ok(q) => q,
            Err(e) => return e.into_response(),
        };
        let result = engine.recommend(&query);
        for w in engine.cache().take_warnings() {
            eprintln!("warning: {w}");
        }
        match result {
            Ok(answer) => {
                let mut r = json_response(StatusCode::OK, answer.json);
                r.headers_mut()
                    .insert("x-cache", HeaderValue::from_static(answer.lookup.name()));
                r
            }
            Err(EngineError::UnknownPullRequest(id)) => error_response(
                StatusCode::NOT_FOUND,
                json!({ "error": "unknown pull request", "pr_id": id }),
            ),
            Err(EngineError::Invalid(message)) => bad("body", message).into_response(),
            Err(EngineError::Internal(e)) => internal(e),
        }
    });
    task.await.unwrap_or_else(internal)
}

async fn health() -> &'static str {
    "ok"
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/recommend", post(recommend))
        .route("/health", get(health))
        .with_state(engine)
}

/// `explicit`, else the environment variable, else the default.
pub fn bind_address(explicit: Option<&str>) -> Result<SocketAddr, String> {
    let from_env = std::env::var(ADDR_ENV).ok();
    let text = explicit.or(from_env.as_deref()).unwrap_or(DEFAULT_ADDR);
    text.parse().map_err(|e| format!("bad listen address {text:?}: {e}"))
}

/// Serves until interrupted.
pub async fn serve(engine: Arc<Engine>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(engine))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
