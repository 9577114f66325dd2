//! HTTP session service.
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/sessions` | `{"scene": <scene document>, "trajectory": <trajectory>}` |
//! | GET | `/sessions/{id}` | |
//! | POST | `/sessions/{id}/commands` | `{"command": "..."}` or `{"constraints": <constraint document>}` |
//! | POST | `/sessions/{id}/accept` | `{"agent": "sequential"}` |
//! | POST | `/sessions/{id}/undo` | |
//!
//! Trajectories are arrays of `{x,y,z,v}` records (or `{"waypoints": [...]}`
//! on input). Sessions live in memory; each one handles a single request
//! at a time.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex;

use crate::agents::AgentKind;
use crate::config::Config;
use crate::constraint::ChatClient;
use crate::io::{SceneDocument, TrajectoryInput};
use crate::pipeline::{cmd_reshape, to_input_frame, CandidateSummary, CommandSource, PipelineError};
use crate::trajectory::{Trajectory, Waypoint};

#[derive(Debug)]
pub enum ApiError {
    BadRequest { path: String, message: String },
    NotFound(String),
    Conflict(String),
    Pipeline(PipelineError),
    Internal(String),
}

impl ApiError {
    fn bad(path: impl Into<String>, message: impl ToString) -> Self {
        ApiError::BadRequest {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, body) = match self {
            ApiError::BadRequest { path, message } => {
                (StatusCode::BAD_REQUEST, json!({"error": message, "path": path}))
            }
            ApiError::NotFound(id) => (StatusCode::NOT_FOUND, json!({"error": format!("unknown session `{id}`")})),
            ApiError::Conflict(m) => (StatusCode::CONFLICT, json!({"error": m})),
            ApiError::Pipeline(e) => {
                let status = if e.exit_code() == crate::pipeline::EXIT_NUMERIC {
                    StatusCode::INTERNAL_SERVER_ERROR
                } else {
                    StatusCode::UNPROCESSABLE_ENTITY
                };
                (status, json!({"error": e.to_string(), "exit_code": e.exit_code()}))
            }
            ApiError::Internal(m) => (StatusCode::INTERNAL_SERVER_ERROR, json!({"error": m})),
        };
        (status, Json(body)).into_response()
    }
}

/// Deserialize a request body, reporting the failing field path.
fn parse_body<T: DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ApiError::bad(path, e.into_inner())
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub scene: SceneDocument,
    pub trajectory: TrajectoryInput,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommandRequest {
    #[serde(default)]
    pub command: Option<String>,
    #[serde(default)]
    pub constraints: Option<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcceptRequest {
    pub agent: AgentKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub agent: AgentKind,
    pub summary: CandidateSummary,
    pub trajectory: Vec<Waypoint>,
}

/// Candidates of the latest round of one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pending {
    pub command: String,
    pub success: bool,
    pub round: usize,
    pub best_agent: AgentKind,
    pub candidates: Vec<Candidate>,
    #[serde(skip)]
    source: CommandSource,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub command: String,
    pub agent: AgentKind,
    pub summary: CandidateSummary,
    #[serde(skip)]
    source: CommandSource,
    #[serde(skip)]
    previous: Trajectory,
}

#[derive(Debug, Clone)]
pub struct Session {
    pub id: String,
    pub scene: SceneDocument,
    pub initial: Trajectory,
    pub current: Trajectory,
    pub history: Vec<HistoryEntry>,
    pub pending: Option<Pending>,
}

#[derive(Serialize)]
struct SessionView<'a> {
    id: &'a str,
    scene: &'a SceneDocument,
    initial: &'a [Waypoint],
    current: &'a [Waypoint],
    history: &'a [HistoryEntry],
    pending: &'a Option<Pending>,
}

impl Session {
    fn view(&self) -> Value {
        serde_json::to_value(SessionView {
            id: &self.id,
            scene: &self.scene,
            initial: self.initial.waypoints(),
            current: self.current.waypoints(),
            history: &self.history,
            pending: &self.pending,
        })
        .expect("session serializes")
    }

    /// Reshape the current trajectory and return the final round's
    /// candidates, one per agent, in the session's units.
    pub fn run_command(
        &self,
        source: &CommandSource,
        config: &Config,
        client: Option<&dyn ChatClient>,
    ) -> Result<Pending, PipelineError> {
        let out = cmd_reshape(&self.scene, &self.current, source, config, client)?;
        let last = out.orchestration.rounds.last().expect("at least one round");
        let candidates = last
            .iter()
            .map(|r| {
                let t = to_input_frame(&r.candidate, &out.report.normalization, self.current.len())?;
                Ok(Candidate {
                    agent: r.agent,
                    summary: r.into(),
                    trajectory: t.waypoints().to_vec(),
                })
            })
            .collect::<Result<Vec<_>, PipelineError>>()?;
        Ok(Pending {
            command: out.report.command.clone(),
            success: out.report.success,
            round: last[0].round,
            best_agent: out.orchestration.best.agent,
            candidates,
            source: source.clone(),
        })
    }

    pub fn accept(&mut self, agent: AgentKind) -> Result<(), ApiError> {
        let pending = self
            .pending
            .take()
            .ok_or_else(|| ApiError::Conflict("no pending candidates; post a command first".into()))?;
        let Some(chosen) = pending.candidates.iter().find(|c| c.agent == agent) else {
            let message = format!("no candidate from agent `{}`", agent.name());
            self.pending = Some(pending);
            return Err(ApiError::bad("agent", message));
        };
        let next = Trajectory::new(chosen.trajectory.clone()).map_err(|e| ApiError::Internal(e.to_string()))?;
        self.history.push(HistoryEntry {
            command: pending.command.clone(),
            agent,
            summary: chosen.summary.clone(),
            source: pending.source.clone(),
            previous: self.current.clone(),
        });
        self.current = next;
        Ok(())
    }

    pub fn undo(&mut self) -> Result<(), ApiError> {
        let entry = self.history.pop().ok_or_else(|| ApiError::Conflict("nothing to undo".into()))?;
        self.current = entry.previous;
        self.pending = None;
        Ok(())
    }

    /// Re-run every accepted command from the initial trajectory, choosing
    /// the same agent each time.
    pub fn replay(&self, config: &Config, client: Option<&dyn ChatClient>) -> Result<Trajectory, PipelineError> {
        let mut replayed = self.clone();
        replayed.current = self.initial.clone();
        replayed.history.clear();
        for entry in &self.history {
            let pending = replayed.run_command(&entry.source, config, client)?;
            replayed.pending = Some(pending);
            replayed
                .accept(entry.agent)
                .map_err(|_| PipelineError::Ordering(Vec::new()))?;
        }
        Ok(replayed.current)
    }
}

type SessionHandle = Arc<Mutex<Session>>;

#[derive(Clone)]
pub struct AppState {
    config: Arc<Config>,
    client: Option<Arc<dyn ChatClient>>,
    sessions: Arc<RwLock<HashMap<String, SessionHandle>>>,
    next_id: Arc<AtomicU64>,
}

impl AppState {
    pub fn new(config: Config, client: Option<Arc<dyn ChatClient>>) -> Self {
        AppState {
            config: Arc::new(config),
            client,
            sessions: Arc::default(),
            next_id: Arc::new(AtomicU64::new(1)),
        }
    }

    fn session(&self, id: &str) -> Result<SessionHandle, ApiError> {
        self.sessions
            .read()
            .expect("session map poisoned")
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::NotFound(id.to_string()))
    }

    /// Snapshot of a session, for tests and tooling.
    pub async fn snapshot(&self, id: &str) -> Option<Session> {
        let handle = self.session(id).ok()?;
        let s = handle.lock().await;
        Some(s.clone())
    }

    pub fn config(&self) -> &Config {
        &self.config
    }
}

async fn create_session(State(app): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: CreateSession = parse_body(&body)?;
    req.scene.validate().map_err(|e| ApiError::bad("scene", e))?;
    let trajectory = req.trajectory.into_trajectory().map_err(|e| ApiError::bad("trajectory", e))?;
    let id = format!("s{}", app.next_id.fetch_add(1, Ordering::Relaxed));
    let session = Session {
        id: id.clone(),
        scene: req.scene,
        initial: trajectory.clone(),
        current: trajectory,
        history: Vec::new(),
        pending: None,
    };
    let view = session.view();
    app.sessions
        .write()
        .expect("session map poisoned")
        .insert(id, Arc::new(Mutex::new(session)));
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn get_session(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let handle = app.session(&id)?;
    let s = handle.lock().await;
    Ok(Json(s.view()))
}

async fn post_command(
    State(app): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<Value>, ApiError> {
    let handle = app.session(&id)?;
    let req: CommandRequest = parse_body(&body)?;
    let source = match (req.command, req.constraints) {
        (Some(c), None) => CommandSource::Text(c),
        (None, Some(doc)) => CommandSource::Document(doc.to_string()),
        _ => return Err(ApiError::bad("", "exactly one of `command` and `constraints` is required")),
    };
    let mut session = handle.lock_owned().await;
    let snapshot = session.clone();
    let config = app.config.clone();
    let client = app.client.clone();
    let pending = tokio::task::spawn_blocking(move || snapshot.run_command(&source, &config, client.as_deref()))
        .await
        .map_err(|e| ApiError::Internal(e.to_string()))?
        .map_err(ApiError::Pipeline)?;
    let body = serde_json::to_value(&pending).expect("candidates serialize");
    session.pending = Some(pending);
    Ok(Json(body))
}

async fn accept(State(app): State<AppState>, Path(id): Path<String>, body: Bytes) -> Result<Json<Value>, ApiError> {
    let handle = app.session(&id)?;
    let req: AcceptRequest = parse_body(&body)?;
    let mut s = handle.lock().await;
    s.accept(req.agent)?;
    Ok(Json(s.view()))
}

async fn undo(State(app): State<AppState>, Path(id): Path<String>) -> Result<Json<Value>, ApiError> {
    let handle = app.session(&id)?;
    let mut s = handle.lock().await;
    s.undo()?;
    Ok(Json(s.view()))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/commands", post(post_command))
        .route("/sessions/{id}/accept", post(accept))
        .route("/sessions/{id}/undo", post(undo))
        .with_state(state)
}

/// Serve until the process is stopped.
pub async fn serve(config: Config, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(AppState::new(config, None))).await
}
