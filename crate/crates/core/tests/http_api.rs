mod support;

use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use eden::service::{router, AppState, Engine, MemoryStore};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(token: Option<&str>, static_dir: Option<std::path::PathBuf>) -> Router {
    let engine = Engine::new(support::study_provider(), Box::new(MemoryStore::default()), support::options(0)).unwrap();
    router(
        AppState {
            engine: Arc::new(engine),
            token: token.map(str::to_string),
        },
        static_dir,
    )
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>, token: Option<&str>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = token {
        req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
    }
    let req = match body {
        Some(b) => req.header(header::CONTENT_TYPE, "application/json").body(Body::from(b.to_string())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, value)
}

fn post_answers() -> Value {
    json!({"l2": [4, 3, 4, 2, 4, 4, 3, 2, 5], "enc": 4, "list": 5, "care": 4, "app": 3, "qual": 4, "conf": 3, "use": 5})
}

#[tokio::test(flavor = "multi_thread")]
async fn full_session_over_http() {
    let app = app(None, None);
    let (status, body) = call(&app, Method::GET, "/healthz", None, None).await;
    assert_eq!((status, body["status"].as_str()), (StatusCode::OK, Some("ok")));

    let (status, created) =
        call(&app, Method::POST, "/api/sessions", Some(json!({"participant_id": "h1", "topic_area": "Food"})), None).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(created["condition"], "none");
    let id = created["session_id"].as_str().unwrap().to_string();

    let (status, dup) =
        call(&app, Method::POST, "/api/sessions", Some(json!({"participant_id": "h1", "topic_area": "Food"})), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!((dup["code"].as_str(), dup["retryable"].as_bool()), (Some("conflict"), Some(false)));

    let (status, pre) = call(&app, Method::POST, &format!("/api/sessions/{id}/surveys/pre"), Some(json!({"l2": vec![3; 9]})), None).await;
    assert_eq!(status, StatusCode::OK, "{pre}");

    for _ in 0..3 {
        let (status, outcome) = call(
            &app,
            Method::POST,
            &format!("/api/sessions/{id}/turns"),
            Some(json!({"text": "We discussed about the plan yesterday.", "negative_affect": 0.2, "pause_durations": [0.4]})),
            None,
        )
        .await;
        assert_eq!(status, StatusCode::OK);
        assert!(outcome["kind"].is_string() && outcome["message"].is_string());
        let (status, ended) = call(&app, Method::POST, &format!("/api/sessions/{id}/end-conversation"), None, None).await;
        assert_eq!(status, StatusCode::OK);
        assert!(ended["conversation_index"].is_u64());
    }

    let (status, view) = call(&app, Method::GET, &format!("/api/sessions/{id}"), None, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["can_take_survey"], true);
    assert!(view.get("condition").is_none(), "condition must stay server-side");

    let (status, done) = call(&app, Method::POST, &format!("/api/sessions/{id}/surveys/post"), Some(post_answers()), None).await;
    assert_eq!(status, StatusCode::OK, "{done}");
    let (status, _) = call(&app, Method::POST, &format!("/api/sessions/{id}/turns"), Some(json!({"text": "hi"})), None).await;
    assert_eq!(status, StatusCode::CONFLICT);

    let (status, summary) = call(&app, Method::GET, "/api/metrics/summary", None, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(summary["completed_surveys"], 1);
    assert_eq!(summary["reassigned"]["none"], 1);
}

#[tokio::test(flavor = "multi_thread")]
async fn validation_errors() {
    let app = app(None, None);
    let (status, _) = call(&app, Method::POST, "/api/sessions/none/turns", Some(json!({"text": "hi"})), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, err) = call(&app, Method::POST, "/api/sessions", Some(json!({"topic_area": "Food"})), None).await;
    assert_eq!((status, err["code"].as_str()), (StatusCode::BAD_REQUEST, Some("bad_request")));
    let (status, _) =
        call(&app, Method::POST, "/api/sessions", Some(json!({"participant_id": "a", "topic_area": "Nope"})), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (_, created) =
        call(&app, Method::POST, "/api/sessions", Some(json!({"participant_id": "v", "topic_area": "Music"})), None).await;
    let id = created["session_id"].as_str().unwrap();
    let (status, _) = call(&app, Method::POST, &format!("/api/sessions/{id}/surveys/pre"), Some(json!({"l2": [7, 3, 3, 3, 3, 3, 3, 3, 3]})), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, Method::POST, &format!("/api/sessions/{id}/surveys/pre"), Some(json!({"l2": vec![3; 8]})), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call(&app, Method::POST, &format!("/api/sessions/{id}/surveys/mid"), Some(json!({"l2": vec![3; 9]})), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, Method::POST, &format!("/api/sessions/{id}/surveys/post"), Some(post_answers()), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&app, Method::POST, &format!("/api/sessions/{id}/turns"), Some(json!({"txt": "hi"})), None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test(flavor = "multi_thread")]
async fn bearer_token_guards_api_only() {
    let app = app(Some("s3cret"), None);
    let (status, err) = call(&app, Method::GET, "/api/metrics/summary", None, None).await;
    assert_eq!((status, err["code"].as_str()), (StatusCode::UNAUTHORIZED, Some("unauthorized")));
    let (status, _) = call(&app, Method::GET, "/api/metrics/summary", None, Some("wrong")).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    let (status, _) = call(&app, Method::GET, "/api/metrics/summary", None, Some("s3cret")).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, Method::GET, "/healthz", None, None).await;
    assert_eq!(status, StatusCode::OK);
    let (status, _) = call(&app, Method::GET, "/app", None, None).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test(flavor = "multi_thread")]
async fn upstream_failure_is_502_and_retryable() {
    let provider = Arc::new(eden::llm::MockProvider::new(eden::llm::MockScript::from_json(r#"{"rules": []}"#).unwrap()));
    let engine = Engine::new(provider, Box::new(MemoryStore::default()), support::options(0)).unwrap();
    let app = router(AppState { engine: Arc::new(engine), token: None }, None);
    let (_, created) =
        call(&app, Method::POST, "/api/sessions", Some(json!({"participant_id": "u", "topic_area": "Books"})), None).await;
    let id = created["session_id"].as_str().unwrap();
    let (status, err) = call(&app, Method::POST, &format!("/api/sessions/{id}/turns"), Some(json!({"text": "Hello."})), None).await;
    assert_eq!(status, StatusCode::BAD_GATEWAY);
    assert_eq!((err["code"].as_str(), err["retryable"].as_bool()), (Some("upstream_failed"), Some(true)));
}

#[tokio::test(flavor = "multi_thread")]
async fn app_serves_static_bundle() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<h1>client</h1>").unwrap();
    let app = app(None, Some(dir.path().to_path_buf()));
    let (status, body) = call(&app, Method::GET, "/app/index.html", None, None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, Value::String("<h1>client</h1>".into()));

    let (status, body) = call(&self::app(None, None), Method::GET, "/app", None, None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body.as_str().unwrap().contains("static_dir"));
}
