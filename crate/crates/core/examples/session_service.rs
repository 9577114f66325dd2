//! Drive the session API in-process: create, command, accept, undo.
//! With `--listen ADDR` it serves on that address instead.

use axum::body::{to_bytes, Body};
use axum::http::Request;
use serde_json::{json, Value};
use tower::ServiceExt;
use trajshape::config::Config;
use trajshape::dataset::{generate_sample, SampleKind};
use trajshape::io::SceneDocument;
use trajshape::service::{router, serve, AppState};

async fn call(app: &axum::Router, method: &str, uri: &str, body: Value) -> Value {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    let bytes = to_bytes(res.into_body(), usize::MAX).await.unwrap();
    println!("{method} {uri} -> {status}");
    serde_json::from_slice(&bytes).unwrap()
}

#[tokio::main]
async fn main() {
    let args: Vec<String> = std::env::args().collect();
    if let Some(addr) = args.iter().position(|a| a == "--listen").and_then(|i| args.get(i + 1)) {
        serve(Config::default(), addr.parse().expect("socket address")).await.unwrap();
        return;
    }
    let app = router(AppState::new(Config::default(), None));
    let sample = generate_sample(11, SampleKind::Single).unwrap();
    let created = call(
        &app,
        "POST",
        "/sessions",
        json!({"scene": SceneDocument::from_objects(&sample.scene, true), "trajectory": sample.trajectory.waypoints()}),
    )
    .await;
    let id = created["id"].as_str().unwrap();
    let round = call(&app, "POST", &format!("/sessions/{id}/commands"), json!({"command": sample.command_text})).await;
    println!("command {:?}, best agent {}", round["command"], round["best_agent"]);
    for c in round["candidates"].as_array().unwrap() {
        println!("  {:<22} passed {}/{}", c["agent"], c["summary"]["passed"], c["summary"]["total"]);
    }
    let best = round["best_agent"].clone();
    let state = call(&app, "POST", &format!("/sessions/{id}/accept"), json!({"agent": best})).await;
    println!("history length {}", state["history"].as_array().unwrap().len());
    let state = call(&app, "POST", &format!("/sessions/{id}/undo"), json!(null)).await;
    println!("after undo, current == initial: {}", state["current"] == state["initial"]);
}
