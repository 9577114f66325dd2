//! JSON constraint documents.
//!
//! ```json
//! {
//!   "source_command": "move closer to the glass",
//!   "constraints": [
//!     {"kind": "distance", "sign": -1, "target": "glass_01",
//!      "intensity": 1.0, "importance": 1.0, "priority": 0}
//!   ],
//!   "sequences": [[0]],
//!   "rationale": "optional free text"
//! }
//! ```
//!
//! `direction` is required for `cartesian` and forbidden otherwise; `sign`
//! is the reverse. `intensity` and `importance` default to 1.0 and
//! `priority` to the constraint's position in the list.

use serde_json::{json, Map, Value};

use super::{
    is_permutation, resolve_object, Constraint, ConstraintError, ConstraintKind, ConstraintSet,
    InterpreterResult, Sign,
};
use crate::geometry::{SceneObject, Vec3};

const TOP_FIELDS: &[&str] = &["constraints", "source_command", "sequences", "rationale"];
const CONSTRAINT_FIELDS: &[&str] = &[
    "kind",
    "direction",
    "sign",
    "target",
    "intensity",
    "importance",
    "priority",
];

fn err(path: impl Into<String>, message: impl Into<String>) -> ConstraintError {
    ConstraintError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn check_fields(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<(), ConstraintError> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            let at = if path.is_empty() {
                key.clone()
            } else {
                format!("{path}.{key}")
            };
            return Err(err(at, "unknown field"));
        }
    }
    Ok(())
}

fn number(obj: &Map<String, Value>, key: &str, path: &str, default: f64) -> Result<f64, ConstraintError> {
    match obj.get(key) {
        None | Some(Value::Null) => Ok(default),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| err(format!("{path}.{key}"), "expected a number")),
    }
}

fn parse_constraint(
    value: &Value,
    index: usize,
    scene: &[SceneObject],
) -> Result<Constraint, ConstraintError> {
    let path = format!("constraints[{index}]");
    let obj = value
        .as_object()
        .ok_or_else(|| err(&path, "expected an object"))?;
    check_fields(obj, CONSTRAINT_FIELDS, &path)?;

    let kind_name = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| err(format!("{path}.kind"), "expected one of cartesian|speed|distance"))?;

    let sign = |required: bool| -> Result<Option<Sign>, ConstraintError> {
        match obj.get("sign") {
            None | Some(Value::Null) if !required => Ok(None),
            Some(_) if !required => Err(err(format!("{path}.sign"), "only valid for speed/distance")),
            Some(v) => v
                .as_i64()
                .and_then(Sign::from_int)
                .map(Some)
                .ok_or_else(|| err(format!("{path}.sign"), "expected 1 or -1")),
            None => Err(err(format!("{path}.sign"), "missing")),
        }
    };

    let kind = match kind_name {
        "cartesian" => {
            sign(false)?;
            let dir = obj
                .get("direction")
                .and_then(Value::as_array)
                .ok_or_else(|| err(format!("{path}.direction"), "expected [x, y, z]"))?;
            let comps: Option<Vec<f64>> = dir.iter().map(Value::as_f64).collect();
            let comps = comps
                .filter(|c| c.len() == 3)
                .ok_or_else(|| err(format!("{path}.direction"), "expected [x, y, z]"))?;
            let d = Vec3::new(comps[0], comps[1], comps[2]);
            let n = d.norm();
            if !(n.is_finite() && n > 1e-12) {
                return Err(err(format!("{path}.direction"), "must be non-zero"));
            }
            // Keep already-unit vectors bit-exact so documents round-trip.
            let direction = if (n - 1.0).abs() < 1e-12 { d } else { d / n };
            ConstraintKind::CartesianShift { direction }
        }
        "speed" | "distance" => {
            if obj.get("direction").is_some_and(|v| !v.is_null()) {
                return Err(err(format!("{path}.direction"), "only valid for cartesian"));
            }
            let s = sign(true)?.expect("required sign present");
            if kind_name == "speed" {
                ConstraintKind::SpeedChange { sign: s }
            } else {
                ConstraintKind::ObjectDistance { sign: s }
            }
        }
        other => {
            return Err(err(
                format!("{path}.kind"),
                format!("unknown kind `{other}`; expected cartesian|speed|distance"),
            ))
        }
    };

    let target = match obj.get("target") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(resolve_object(s, scene)?),
        Some(_) => return Err(err(format!("{path}.target"), "expected a string or null")),
    };

    let priority = match obj.get("priority") {
        None | Some(Value::Null) => index as u32,
        Some(v) => v
            .as_u64()
            .and_then(|p| u32::try_from(p).ok())
            .ok_or_else(|| err(format!("{path}.priority"), "expected a non-negative integer"))?,
    };

    let constraint = Constraint {
        kind,
        target,
        intensity: number(obj, "intensity", &path, 1.0)?,
        importance: number(obj, "importance", &path, 1.0)?,
        priority,
    };
    constraint.validate(scene, &path)?;
    Ok(constraint)
}

fn parse_value(root: &Value, scene: &[SceneObject]) -> Result<InterpreterResult, ConstraintError> {
    let obj = root
        .as_object()
        .ok_or_else(|| err("$", "expected a JSON object"))?;
    check_fields(obj, TOP_FIELDS, "")?;
    let list = obj
        .get("constraints")
        .and_then(Value::as_array)
        .ok_or_else(|| err("constraints", "expected an array"))?;
    if list.is_empty() {
        return Err(err("constraints", "must not be empty"));
    }
    let constraints = list
        .iter()
        .enumerate()
        .map(|(i, v)| parse_constraint(v, i, scene))
        .collect::<Result<Vec<_>, _>>()?;

    let source_command = match obj.get("source_command") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(err("source_command", "expected a string")),
    };

    let mut sequences = Vec::new();
    if let Some(v) = obj.get("sequences").filter(|v| !v.is_null()) {
        let arr = v
            .as_array()
            .ok_or_else(|| err("sequences", "expected an array of orderings"))?;
        for (i, seq) in arr.iter().enumerate() {
            let order: Option<Vec<usize>> = seq
                .as_array()
                .map(|a| a.iter().map(|x| x.as_u64().map(|u| u as usize)).collect())
                .unwrap_or(None);
            match order {
                Some(o) if is_permutation(&o, constraints.len()) => sequences.push(o),
                _ => {
                    return Err(err(
                        format!("sequences[{i}]"),
                        "must be a permutation of the constraint indices",
                    ))
                }
            }
        }
    }

    let rationale = match obj.get("rationale") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(err("rationale", "expected a string")),
    };

    Ok(InterpreterResult {
        constraint_set: ConstraintSet {
            constraints,
            source_command,
        },
        sequences,
        rationale,
        warnings: Vec::new(),
    })
}

pub(crate) fn parse_document_value(
    root: &Value,
    scene: &[SceneObject],
) -> Result<InterpreterResult, ConstraintError> {
    parse_value(root, scene)
}

/// Parse and validate a constraint document against the scene.
pub fn parse_constraint_document(
    text: &str,
    scene: &[SceneObject],
) -> Result<ConstraintSet, ConstraintError> {
    parse_interpreter_document(text, scene).map(|r| r.constraint_set)
}

/// Like [`parse_constraint_document`] but keeps `sequences` and `rationale`.
pub fn parse_interpreter_document(
    text: &str,
    scene: &[SceneObject],
) -> Result<InterpreterResult, ConstraintError> {
    let root: Value = serde_json::from_str(text).map_err(|e| err("$", e.to_string()))?;
    parse_value(&root, scene)
}

pub(crate) fn constraint_to_value(c: &Constraint) -> Value {
    let mut obj = Map::new();
    obj.insert("kind".into(), json!(c.kind.label()));
    match c.kind {
        ConstraintKind::CartesianShift { direction } => {
            obj.insert("direction".into(), json!([direction.x, direction.y, direction.z]));
        }
        ConstraintKind::SpeedChange { sign } | ConstraintKind::ObjectDistance { sign } => {
            obj.insert("sign".into(), json!(sign.as_int()));
        }
    }
    obj.insert("target".into(), json!(c.target));
    obj.insert("intensity".into(), json!(c.intensity));
    obj.insert("importance".into(), json!(c.importance));
    obj.insert("priority".into(), json!(c.priority));
    Value::Object(obj)
}

/// Render a constraint set as a document that parses back to itself.
pub fn serialize_constraint_set(set: &ConstraintSet) -> Value {
    json!({
        "source_command": set.source_command,
        "constraints": set.constraints.iter().map(constraint_to_value).collect::<Vec<_>>(),
    })
}
