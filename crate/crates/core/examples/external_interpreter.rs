//! The external interpreter against a local mock chat endpoint that first
//! replies with prose, then with a valid constraint document.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::routing::post;
use axum::{Json, Router};
use serde_json::{json, Value};
use trajshape::constraint::{interpret_command_external, system_prompt, HttpChatClient, InterpreterEndpoint};
use trajshape::geometry::{Pose, Primitive, SceneObject, Vec3};

fn main() {
    let runtime = tokio::runtime::Runtime::new().unwrap();
    let calls = Arc::new(AtomicUsize::new(0));
    let counter = calls.clone();
    let app = Router::new().route(
        "/v1/chat/completions",
        post(move |Json(req): Json<Value>| {
            let n = counter.fetch_add(1, Ordering::SeqCst);
            async move {
                let user = req["messages"][1]["content"].as_str().unwrap_or_default().to_string();
                let content = if n == 0 {
                    "Sure! I think the robot should avoid the vase.".to_string()
                } else {
                    assert!(user.contains("could not be used"));
                    json!({"constraints": [
                        {"kind": "distance", "sign": 1, "target": "vase", "intensity": 1.5, "importance": 5.0, "priority": 0}
                    ], "rationale": "vase is fragile"})
                    .to_string()
                };
                Json(json!({"choices": [{"message": {"role": "assistant", "content": content}}]}))
            }
        }),
    );
    let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let addr = listener.local_addr().unwrap();
    runtime.spawn(async move { axum::serve(listener, app).await.unwrap() });

    let scene = vec![SceneObject::new(
        "vase_01",
        "vase",
        Primitive::Cylinder {
            radius: 0.05,
            half_length: 0.12,
        },
        Pose::from_translation(Vec3::new(0.2, 0.0, 0.1)),
    )
    .with_fragility(0.95)];
    println!("{}", system_prompt(&scene));
    let client = HttpChatClient::new(InterpreterEndpoint {
        url: format!("http://{addr}/v1/chat/completions"),
        model: "mock".into(),
        token: Some("not-a-secret".into()),
        timeout_secs: 5,
    });
    let result = interpret_command_external("keep well clear of the vase", &scene, &client).unwrap();
    println!("requests: {}", calls.load(Ordering::SeqCst));
    println!("rationale: {}", result.rationale);
    println!("warnings: {:?}", result.warnings);
    for c in &result.constraint_set.constraints {
        println!("{c:?}");
    }
}
