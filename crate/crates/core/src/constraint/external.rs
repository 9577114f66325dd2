//! Client side of an external chat-completion interpreter.
//!
//! The service is treated strictly as a producer of constraint documents:
//! its reply goes through the same parser and validation as a document
//! read from disk.

use std::time::Duration;

use log::warn;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::document::parse_document_value;
use super::{ConstraintError, InterpreterResult, WEIGHT_MAX};
use crate::geometry::SceneObject;

const PROMPT_HEADER: &str = include_str!("system_prompt.txt");

/// Where and how to reach the interpreter service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpreterEndpoint {
    /// Full URL of an OpenAI-compatible `chat/completions` endpoint.
    pub url: String,
    pub model: String,
    #[serde(default)]
    pub token: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_timeout() -> u64 {
    60
}

impl Default for InterpreterEndpoint {
    fn default() -> Self {
        InterpreterEndpoint {
            url: "http://localhost:8000/v1/chat/completions".into(),
            model: "gpt-4o".into(),
            token: None,
            timeout_secs: default_timeout(),
        }
    }
}

/// A chat completion backend: one system prompt, one user message, one reply.
pub trait ChatClient: Send + Sync {
    fn complete(&self, system: &str, user: &str) -> Result<String, ConstraintError>;
}

/// Blocking HTTP client for an OpenAI-compatible chat completion API.
pub struct HttpChatClient {
    endpoint: InterpreterEndpoint,
    agent: ureq::Agent,
}

impl HttpChatClient {
    pub fn new(endpoint: InterpreterEndpoint) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(endpoint.timeout_secs)))
            .build()
            .into();
        HttpChatClient { endpoint, agent }
    }
}

impl ChatClient for HttpChatClient {
    fn complete(&self, system: &str, user: &str) -> Result<String, ConstraintError> {
        let body = json!({
            "model": self.endpoint.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        });
        let mut request = self.agent.post(&self.endpoint.url);
        if let Some(token) = &self.endpoint.token {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let reply: Value = request
            .send_json(&body)
            .map_err(|e| ConstraintError::Transport(e.to_string()))?
            .into_body()
            .read_json()
            .map_err(|e| ConstraintError::Transport(e.to_string()))?;
        reply
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| ConstraintError::Transport("reply has no choices[0].message.content".into()))
    }
}

/// The fixed system prompt followed by one line per scene object.
pub fn system_prompt(scene: &[SceneObject]) -> String {
    let mut prompt = PROMPT_HEADER.to_string();
    for o in scene {
        prompt.push_str(&format!(
            "- id: {}, name: {}, shape: {}, fragility: {:.2}\n",
            o.id,
            o.name,
            o.primitive.kind_name(),
            o.fragility
        ));
    }
    prompt
}

/// Strip an optional markdown code fence around the JSON reply.
fn extract_json(reply: &str) -> &str {
    let trimmed = reply.trim();
    if let Some(start) = trimmed.find('{') {
        if let Some(end) = trimmed.rfind('}') {
            if end >= start {
                return &trimmed[start..=end];
            }
        }
    }
    trimmed
}

fn clamp_importance(root: &mut Value, warnings: &mut Vec<String>) {
    let Some(list) = root.get_mut("constraints").and_then(Value::as_array_mut) else {
        return;
    };
    for (i, c) in list.iter_mut().enumerate() {
        let Some(slot) = c.get_mut("importance") else {
            continue;
        };
        let Some(v) = slot.as_f64() else {
            continue;
        };
        let clamped = v.clamp(0.05, WEIGHT_MAX);
        if clamped != v {
            let msg = format!("constraints[{i}].importance {v} clamped to {clamped}");
            warn!("{msg}");
            warnings.push(msg);
            *slot = json!(clamped);
        }
    }
}

fn parse_reply(reply: &str, scene: &[SceneObject]) -> Result<InterpreterResult, ConstraintError> {
    let mut root: Value = serde_json::from_str(extract_json(reply)).map_err(|e| ConstraintError::Schema {
        path: "$".into(),
        message: e.to_string(),
    })?;
    let mut warnings = Vec::new();
    clamp_importance(&mut root, &mut warnings);
    let mut result = parse_document_value(&root, scene)?;
    result.warnings = warnings;
    Ok(result)
}

/// Interpret `command` through an external chat service.
///
/// A reply that fails to parse is retried once with the error appended;
/// a second failure is reported with both raw replies.
pub fn interpret_command_external(
    command: &str,
    scene: &[SceneObject],
    client: &dyn ChatClient,
) -> Result<InterpreterResult, ConstraintError> {
    let system = system_prompt(scene);
    let first = client.complete(&system, command)?;
    let first_err = match parse_reply(&first, scene) {
        Ok(mut r) => {
            r.constraint_set.source_command = command.to_string();
            return Ok(r);
        }
        Err(e) => e,
    };
    let retry = format!(
        "{command}\n\nYour previous reply could not be used: {first_err}. \
         Reply again with only the JSON document."
    );
    let second = client.complete(&system, &retry)?;
    match parse_reply(&second, scene) {
        Ok(mut r) => {
            r.constraint_set.source_command = command.to_string();
            Ok(r)
        }
        Err(e) => Err(ConstraintError::InterpretationFailed {
            error: e.to_string(),
            first_reply: first,
            second_reply: second,
        }),
    }
}
