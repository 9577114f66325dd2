//! Declarative reshaping constraints and the interpreters that produce them.
//!
//! Direction words are bound to axes of the normalized frame:
//! right/left = ±X, front/back = ±Y, up/down = ±Z.

mod document;
mod external;
mod template;

pub use document::{parse_constraint_document, parse_interpreter_document, serialize_constraint_set};
pub use external::{
    interpret_command_external, system_prompt, ChatClient, HttpChatClient, InterpreterEndpoint,
};
pub use template::interpret_command_template;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{SceneObject, Vec3};

/// Lower (exclusive) and upper (inclusive) bound of intensity and importance.
pub const WEIGHT_MAX: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstraintError {
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("unknown object `{reference}`; scene has: {}", .candidates.join(", "))]
    UnknownObject {
        reference: String,
        candidates: Vec<String>,
    },
    #[error("object reference `{reference}` is ambiguous: {}", .matches.join(", "))]
    AmbiguousObject {
        reference: String,
        matches: Vec<String>,
    },
    #[error("could not interpret clause `{0}`")]
    UnrecognizedClause(String),
    #[error("command contains no clause")]
    EmptyCommand,
    #[error("interpreter transport failed: {0}")]
    Transport(String),
    #[error("interpreter replies could not be parsed ({error}); first reply: {first_reply:?}; second reply: {second_reply:?}")]
    InterpretationFailed {
        error: String,
        first_reply: String,
        second_reply: String,
    },
}

impl ConstraintError {
    fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConstraintError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// +1 or -1: faster/slower for speed, farther/closer for distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_int(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn as_int(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstraintKind {
    /// Shift along a unit direction.
    CartesianShift { direction: Vec3 },
    SpeedChange { sign: Sign },
    ObjectDistance { sign: Sign },
}

impl ConstraintKind {
    pub fn label(&self) -> &'static str {
        match self {
            ConstraintKind::CartesianShift { .. } => "cartesian",
            ConstraintKind::SpeedChange { .. } => "speed",
            ConstraintKind::ObjectDistance { .. } => "distance",
        }
    }
}

/// One reshaping instruction.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub kind: ConstraintKind,
    /// Object id; absent only for a global Cartesian shift.
    pub target: Option<String>,
    pub intensity: f64,
    pub importance: f64,
    /// Lower runs earlier in sequential execution.
    pub priority: u32,
}

impl Constraint {
    pub fn new(kind: ConstraintKind, target: Option<String>) -> Self {
        Constraint {
            kind,
            target,
            intensity: 1.0,
            importance: 1.0,
            priority: 0,
        }
    }

    pub fn cartesian(direction: Vec3) -> Self {
        Constraint::new(
            ConstraintKind::CartesianShift {
                direction: direction.normalize(),
            },
            None,
        )
    }

    pub fn speed(sign: Sign, target: impl Into<String>) -> Self {
        Constraint::new(ConstraintKind::SpeedChange { sign }, Some(target.into()))
    }

    pub fn distance(sign: Sign, target: impl Into<String>) -> Self {
        Constraint::new(ConstraintKind::ObjectDistance { sign }, Some(target.into()))
    }

    pub fn with_intensity(mut self, intensity: f64) -> Self {
        self.intensity = intensity;
        self
    }

    pub fn with_importance(mut self, importance: f64) -> Self {
        self.importance = importance;
        self
    }

    pub fn with_priority(mut self, priority: u32) -> Self {
        self.priority = priority;
        self
    }

    pub fn with_target(mut self, target: impl Into<String>) -> Self {
        self.target = Some(target.into());
        self
    }

    /// Check bounds and that any target names an object of `scene`.
    pub fn validate(&self, scene: &[SceneObject], path: &str) -> Result<(), ConstraintError> {
        let in_bounds = |v: f64| v.is_finite() && v > 0.0 && v <= WEIGHT_MAX;
        if !in_bounds(self.intensity) {
            return Err(ConstraintError::schema(
                format!("{path}.intensity"),
                format!("must lie in (0, {WEIGHT_MAX}], got {}", self.intensity),
            ));
        }
        if !in_bounds(self.importance) {
            return Err(ConstraintError::schema(
                format!("{path}.importance"),
                format!("must lie in (0, {WEIGHT_MAX}], got {}", self.importance),
            ));
        }
        if let ConstraintKind::CartesianShift { direction } = self.kind {
            if !((direction.norm() - 1.0).abs() < 1e-9) {
                return Err(ConstraintError::schema(
                    format!("{path}.direction"),
                    "must be a unit vector",
                ));
            }
        }
        match (&self.kind, &self.target) {
            (ConstraintKind::CartesianShift { .. }, None) => Ok(()),
            (_, None) => Err(ConstraintError::schema(
                format!("{path}.target"),
                "speed and distance constraints need a target object",
            )),
            (_, Some(id)) => {
                if scene.iter().any(|o| &o.id == id) {
                    Ok(())
                } else {
                    Err(ConstraintError::UnknownObject {
                        reference: id.clone(),
                        candidates: scene.iter().map(|o| o.id.clone()).collect(),
                    })
                }
            }
        }
    }
}

/// The constraints derived from one user command.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet {
    pub constraints: Vec<Constraint>,
    pub source_command: String,
}

impl ConstraintSet {
    pub fn new(constraints: Vec<Constraint>, source_command: impl Into<String>) -> Self {
        ConstraintSet {
            constraints,
            source_command: source_command.into(),
        }
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn validate(&self, scene: &[SceneObject]) -> Result<(), ConstraintError> {
        if self.constraints.is_empty() {
            return Err(ConstraintError::schema("constraints", "must not be empty"));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            c.validate(scene, &format!("constraints[{i}]"))?;
        }
        Ok(())
    }

    /// Constraint indices ordered by ascending priority, stable in list order.
    pub fn priority_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.constraints.len()).collect();
        order.sort_by_key(|&i| self.constraints[i].priority);
        order
    }
}

/// What an interpreter hands back: the constraints, optional alternative
/// execution orders, and free-form reasoning for logs.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpreterResult {
    pub constraint_set: ConstraintSet,
    pub sequences: Vec<Vec<usize>>,
    pub rationale: String,
    pub warnings: Vec<String>,
}

impl InterpreterResult {
    pub fn from_set(constraint_set: ConstraintSet) -> Self {
        InterpreterResult {
            constraint_set,
            sequences: Vec::new(),
            rationale: String::new(),
            warnings: Vec::new(),
        }
    }
}

/// Whether `order` is a permutation of `0..n`.
pub fn is_permutation(order: &[usize], n: usize) -> bool {
    if order.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || seen[i] {
            return false;
        }
        seen[i] = true;
    }
    true
}

/// Resolve an object reference: exact id first, then case-insensitive name
/// (underscores and spaces are interchangeable).
pub fn resolve_object(reference: &str, scene: &[SceneObject]) -> Result<String, ConstraintError> {
    if let Some(o) = scene.iter().find(|o| o.id == reference) {
        return Ok(o.id.clone());
    }
    let canon = |s: &str| s.trim().to_lowercase().replace('_', " ");
    let wanted = canon(reference);
    let matches: Vec<&SceneObject> = scene
        .iter()
        .filter(|o| canon(&o.name) == wanted || canon(&o.id) == wanted)
        .collect();
    match matches.len() {
        1 => Ok(matches[0].id.clone()),
        0 => Err(ConstraintError::UnknownObject {
            reference: reference.to_string(),
            candidates: scene.iter().map(|o| o.id.clone()).collect(),
        }),
        _ => Err(ConstraintError::AmbiguousObject {
            reference: reference.to_string(),
            matches: matches.iter().map(|o| o.id.clone()).collect(),
        }),
    }
}
