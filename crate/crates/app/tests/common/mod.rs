#![allow(dead_code)]

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use revrec::cache::{RecommendationCache, DEFAULT_CAPACITY};
use revrec::engine::{Engine, ProjectSpec};
use tower::ServiceExt;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn project_args() -> Vec<String> {
    let f = fixtures();
    vec![
        "--repo".into(),
        f.join("repo").display().to_string(),
        "--history".into(),
        f.join("prs.ndjson").display().to_string(),
    ]
}

pub fn revrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_revrec"))
        .args(args)
        .env_remove("REVREC_SERVE_ADDR")
        .output()
        .expect("binary runs")
}

/// `revrec <command> --repo … --history … <rest>`
pub fn revrec_on_fixture(command: &str, rest: &[&str]) -> Output {
    let project = project_args();
    let mut args: Vec<&str> = vec![command];
    args.extend(project.iter().map(String::as_str));
    args.extend_from_slice(rest);
    revrec(&args)
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 stderr")
}

pub fn engine() -> Arc<Engine> {
    let f = fixtures();
    let spec = ProjectSpec::new(f.join("repo"), f.join("prs.ndjson"));
    Arc::new(Engine::open(&spec, Arc::new(RecommendationCache::in_memory(DEFAULT_CAPACITY))).expect("fixture opens"))
}

pub struct Reply {
    pub status: StatusCode,
    pub cache: Option<String>,
    pub body: String,
}

pub async fn send(router: Router, request: Request<Body>) -> Reply {
    let response = router.oneshot(request).await.expect("router responds");
    let status = response.status();
    let cache = response
        .headers()
        .get("x-cache")
        .map(|v| v.to_str().unwrap().to_string());
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    Reply {
        status,
        cache,
        body: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

pub async fn post(router: Router, body: &str) -> Reply {
    let request = Request::post("/recommend")
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    send(router, request).await
}

pub async fn get(router: Router, path: &str) -> Reply {
    send(router, Request::get(path).body(Body::empty()).unwrap()).await
}
