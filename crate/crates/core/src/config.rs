//! TOML configuration for the CLI and the session service.
//!
//! ```toml
//! resolution = 64
//!
//! [optimizer]
//! eta = 0.02
//!
//! [observer]
//! distance = 0.05
//!
//! [orchestrator]
//! max_rounds = 4
//!
//! [influence]
//! floor = 0.3
//! scale = 1.5
//!
//! [interpreter]
//! kind = "template"
//! ```
//!
//! `TRAJSHAPE_INTERPRETER_URL`, `TRAJSHAPE_INTERPRETER_MODEL` and
//! `TRAJSHAPE_INTERPRETER_TOKEN` override the interpreter endpoint.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{OrchestratorOptions, Thresholds};
use crate::constraint::InterpreterEndpoint;
use crate::geometry::Primitive;
use crate::optimizer::OptimizerParams;
use crate::registration::RegistrationParams;
use crate::trajectory::MIN_WAYPOINTS;

pub const ENV_URL: &str = "TRAJSHAPE_INTERPRETER_URL";
pub const ENV_MODEL: &str = "TRAJSHAPE_INTERPRETER_MODEL";
pub const ENV_TOKEN: &str = "TRAJSHAPE_INTERPRETER_TOKEN";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Read { path: String, message: String },
    #[error("config: {0}")]
    Parse(String),
    #[error("config: invalid `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InterpreterKind {
    #[default]
    Template,
    External,
}

fn default_endpoint() -> InterpreterEndpoint {
    InterpreterEndpoint::default()
}

/// Interpreter selection plus the endpoint fields, flat in one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterpreterConfig {
    #[serde(default)]
    pub kind: InterpreterKind,
    #[serde(default = "default_url")]
    pub url: String,
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default)]
    pub token: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_url() -> String {
    default_endpoint().url
}

fn default_model() -> String {
    default_endpoint().model
}

fn default_timeout() -> u64 {
    default_endpoint().timeout_secs
}

impl Default for InterpreterConfig {
    fn default() -> Self {
        let e = default_endpoint();
        InterpreterConfig {
            kind: InterpreterKind::default(),
            url: e.url,
            model: e.model,
            token: e.token,
            timeout_secs: e.timeout_secs,
        }
    }
}

impl InterpreterConfig {
    pub fn endpoint(&self) -> InterpreterEndpoint {
        InterpreterEndpoint {
            url: self.url.clone(),
            model: self.model.clone(),
            token: self.token.clone(),
            timeout_secs: self.timeout_secs,
        }
    }
}

fn default_floor() -> f64 {
    0.3
}

fn default_scale() -> f64 {
    1.5
}

/// Influence radius for objects whose scene entry gives none, in
/// normalized units: `max(floor, scale * largest dimension)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfluenceRule {
    #[serde(default = "default_floor")]
    pub floor: f64,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

impl Default for InfluenceRule {
    fn default() -> Self {
        InfluenceRule {
            floor: default_floor(),
            scale: default_scale(),
        }
    }
}

impl InfluenceRule {
    pub fn radius(&self, primitive: &Primitive) -> f64 {
        (self.scale * primitive.largest_dimension()).max(self.floor)
    }
}

fn default_max_rounds() -> usize {
    OrchestratorOptions::default().max_rounds
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrchestratorConfig {
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        OrchestratorConfig {
            max_rounds: default_max_rounds(),
        }
    }
}

fn default_resolution() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    /// Working number of waypoints during optimization.
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default)]
    pub optimizer: OptimizerParams,
    #[serde(default)]
    pub observer: Thresholds,
    #[serde(default)]
    pub orchestrator: OrchestratorConfig,
    #[serde(default)]
    pub registration: RegistrationParams,
    #[serde(default)]
    pub influence: InfluenceRule,
    #[serde(default)]
    pub interpreter: InterpreterConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            resolution: default_resolution(),
            optimizer: OptimizerParams::default(),
            observer: Thresholds::default(),
            orchestrator: OrchestratorConfig::default(),
            registration: RegistrationParams::default(),
            influence: InfluenceRule::default(),
            interpreter: InterpreterConfig::default(),
        }
    }
}

impl Config {
    /// Parse and validate; environment overrides are not applied.
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let config: Config = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Read `path` (defaults when `None`) and apply environment overrides.
    pub fn load(path: Option<&Path>) -> Result<Config, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError::Read {
                    path: p.display().to_string(),
                    message: e.to_string(),
                })?;
                Config::parse(&text)?
            }
            None => Config::default(),
        };
        config.apply_env(|k| std::env::var(k).ok());
        Ok(config)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) {
        let endpoint = &mut self.interpreter;
        if let Some(url) = var(ENV_URL) {
            endpoint.url = url;
        }
        if let Some(model) = var(ENV_MODEL) {
            endpoint.model = model;
        }
        if let Some(token) = var(ENV_TOKEN) {
            endpoint.token = Some(token);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.resolution < MIN_WAYPOINTS {
            return Err(invalid("resolution", format!("must be at least {MIN_WAYPOINTS}")));
        }
        self.optimizer.validate().map_err(|e| invalid("optimizer", e))?;
        let t = &self.observer;
        for (name, v) in [("distance", t.distance), ("cartesian", t.cartesian), ("speed", t.speed)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(&format!("observer.{name}"), "must be positive"));
            }
        }
        if self.orchestrator.max_rounds == 0 {
            return Err(invalid("orchestrator.max_rounds", "must be at least 1"));
        }
        let r = &self.registration;
        if r.neighbors == 0 || r.min_points == 0 || !(r.eps > 0.0) || !(r.std_ratio > 0.0) {
            return Err(invalid("registration", "parameters must be positive"));
        }
        let i = &self.influence;
        if !(i.floor > 0.0 && i.floor.is_finite() && i.scale > 0.0 && i.scale.is_finite()) {
            return Err(invalid("influence", "floor and scale must be positive"));
        }
        Ok(())
    }

    pub fn orchestrator_options(&self) -> OrchestratorOptions {
        OrchestratorOptions {
            max_rounds: self.orchestrator.max_rounds,
            thresholds: self.observer,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
        let c = Config::default();
        assert_eq!(c.resolution, 64);
        assert_eq!(c.orchestrator_options(), OrchestratorOptions::default());
        assert_eq!(c.influence.radius(&Primitive::Sphere { radius: 0.05 }), 0.3);
        assert!((c.influence.radius(&Primitive::Sphere { radius: 0.4 }) - 1.2).abs() < 1e-12);
    }

    #[test]
    fn sections_parse_and_unknown_keys_fail() {
        let c = Config::parse(
            "resolution = 32\n[optimizer]\neta = 0.01\n[observer]\nspeed = 0.2\n\
             [interpreter]\nkind = \"external\"\nurl = \"http://x/v1\"\nmodel = \"m\"\n",
        )
        .unwrap();
        assert_eq!(c.resolution, 32);
        assert_eq!(c.optimizer.eta, 0.01);
        assert_eq!(c.observer.speed, 0.2);
        assert_eq!(c.interpreter.kind, InterpreterKind::External);
        assert_eq!(c.interpreter.url, "http://x/v1");
        assert!(Config::parse("[optimizer]\netta = 1").is_err());
        assert!(Config::parse("colour = 1").is_err());
        assert!(Config::parse("resolution = 2").is_err());
        assert!(Config::parse("[observer]\ndistance = -1").is_err());
    }

    #[test]
    fn environment_overrides_endpoint() {
        let mut c = Config::default();
        c.apply_env(|k| match k {
            ENV_URL => Some("http://override".into()),
            ENV_TOKEN => Some("secret".into()),
            _ => None,
        });
        assert_eq!(c.interpreter.url, "http://override");
        assert_eq!(c.interpreter.token.as_deref(), Some("secret"));
        assert_eq!(c.interpreter.model, InterpreterEndpoint::default().model);
    }
}
