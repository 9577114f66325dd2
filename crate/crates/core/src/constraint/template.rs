//! Deterministic interpreter for a small English command grammar.
//!
//! A command is a list of clauses joined by `,`, `and` or `then`. Each
//! clause is exactly one of:
//!
//! * distance: `closer`/`nearer` or `farther`/`further`/`away`, with the
//!   object after `to`, `from`, `near`, `around`, `by`, `next to` or
//!   `close to` ("move closer to the chair");
//! * speed: `faster`/`quicker`/`speed up`/`accelerate` or
//!   `slower`/`slow down`/`decelerate`, with the object after `near`,
//!   `around`, `by`, `next to` or `close to` ("slow down when next to the
//!   table");
//! * cartesian: `right`, `left`, `front`/`forward`, `back`/`backward`,
//!   `up`/`higher`, `down`/`lower`, optionally restricted to an object with
//!   `near`, `around`, `by`, `next to` or `close to` ("go more to the
//!   right").
//!
//! `slightly`, `a bit` and `a little` give intensity 0.5; `much`, `a lot`
//! and `significantly` give 1.5. Priorities follow clause order. Anything
//! else is rejected rather than guessed.

use super::{
    resolve_object, Constraint, ConstraintError, ConstraintKind, ConstraintSet,
    InterpreterResult, Sign,
};
use crate::geometry::{SceneObject, Vec3};

const SOFT_WORDS: &[&str] = &["slightly", "bit", "little"];
const STRONG_WORDS: &[&str] = &["much", "lot", "significantly"];
const NEAR_PREPOSITIONS: &[&str] = &["near", "around", "by", "next", "close"];
const DISTANCE_PREPOSITIONS: &[&str] = &["to", "from", "near", "around", "by", "next", "close"];
const ARTICLES: &[&str] = &["the", "a", "an"];

fn split_clauses(command: &str) -> Vec<Vec<String>> {
    let cleaned: String = command
        .to_lowercase()
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c == '_' || c == ',' {
                c
            } else {
                ' '
            }
        })
        .collect();
    let mut clauses = Vec::new();
    for piece in cleaned.split(',') {
        let mut current = Vec::new();
        for tok in piece.split_whitespace() {
            if tok == "and" || tok == "then" {
                if !current.is_empty() {
                    clauses.push(std::mem::take(&mut current));
                }
            } else {
                current.push(tok.to_string());
            }
        }
        if !current.is_empty() {
            clauses.push(current);
        }
    }
    clauses
}

fn has_pair(tokens: &[String], a: &str, b: &str) -> Option<usize> {
    tokens.windows(2).position(|w| w[0] == a && w[1] == b)
}

/// Object phrase following the first preposition after `from`.
fn object_phrase(tokens: &[String], from: usize, prepositions: &[&str]) -> Option<String> {
    let mut i = from;
    while i < tokens.len() {
        let tok = tokens[i].as_str();
        if prepositions.contains(&tok) {
            // "to the right" is a direction, not an object.
            let mut j = i + 1;
            if (tok == "next" || tok == "close") && tokens.get(j).is_some_and(|t| t == "to") {
                j += 1;
            } else if tok == "next" || tok == "close" {
                i += 1;
                continue;
            }
            while tokens.get(j).is_some_and(|t| ARTICLES.contains(&t.as_str())) {
                j += 1;
            }
            if j < tokens.len() {
                return Some(tokens[j..].join(" "));
            }
            return None;
        }
        i += 1;
    }
    None
}

fn intensity(tokens: &[String]) -> f64 {
    if tokens.iter().any(|t| SOFT_WORDS.contains(&t.as_str())) {
        0.5
    } else if tokens.iter().any(|t| STRONG_WORDS.contains(&t.as_str())) {
        1.5
    } else {
        1.0
    }
}

fn distance_sign(tokens: &[String]) -> Option<(Sign, usize)> {
    for (i, t) in tokens.iter().enumerate() {
        match t.as_str() {
            "closer" | "nearer" => return Some((Sign::Minus, i)),
            "farther" | "further" | "away" => return Some((Sign::Plus, i)),
            _ => {}
        }
    }
    None
}

fn speed_sign(tokens: &[String]) -> Option<(Sign, usize)> {
    if let Some(i) = has_pair(tokens, "speed", "up") {
        return Some((Sign::Plus, i + 1));
    }
    if let Some(i) = has_pair(tokens, "slow", "down") {
        return Some((Sign::Minus, i + 1));
    }
    for (i, t) in tokens.iter().enumerate() {
        match t.as_str() {
            "faster" | "quicker" | "accelerate" => return Some((Sign::Plus, i)),
            "slower" | "decelerate" => return Some((Sign::Minus, i)),
            _ => {}
        }
    }
    None
}

fn cartesian_direction(tokens: &[String]) -> Option<(Vec3, usize)> {
    for (i, t) in tokens.iter().enumerate() {
        let dir = match t.as_str() {
            "right" => Vec3::x(),
            "left" => -Vec3::x(),
            "front" | "forward" | "forwards" => Vec3::y(),
            "back" | "backward" | "backwards" => -Vec3::y(),
            "up" | "higher" | "upward" | "upwards" => Vec3::z(),
            "down" | "lower" | "downward" | "downwards" => -Vec3::z(),
            _ => continue,
        };
        return Some((dir, i));
    }
    None
}

fn interpret_clause(
    tokens: &[String],
    scene: &[SceneObject],
    priority: u32,
) -> Result<Constraint, ConstraintError> {
    let clause = tokens.join(" ");
    let resolve = |phrase: Option<String>| -> Result<String, ConstraintError> {
        let phrase = phrase.ok_or_else(|| ConstraintError::UnrecognizedClause(clause.clone()))?;
        resolve_object(&phrase, scene)
    };

    let (kind, target) = if let Some((sign, at)) = distance_sign(tokens) {
        let target = resolve(object_phrase(tokens, at + 1, DISTANCE_PREPOSITIONS))?;
        (ConstraintKind::ObjectDistance { sign }, Some(target))
    } else if let Some((sign, at)) = speed_sign(tokens) {
        let target = resolve(object_phrase(tokens, at + 1, NEAR_PREPOSITIONS))?;
        (ConstraintKind::SpeedChange { sign }, Some(target))
    } else if let Some((direction, at)) = cartesian_direction(tokens) {
        let target = match object_phrase(tokens, at + 1, NEAR_PREPOSITIONS) {
            Some(phrase) => Some(resolve_object(&phrase, scene)?),
            None => None,
        };
        (ConstraintKind::CartesianShift { direction }, target)
    } else {
        return Err(ConstraintError::UnrecognizedClause(clause));
    };

    Ok(Constraint {
        kind,
        target,
        intensity: intensity(tokens),
        importance: 1.0,
        priority,
    })
}

/// Map a command from the template grammar onto constraints, one per clause.
pub fn interpret_command_template(
    command: &str,
    scene: &[SceneObject],
) -> Result<InterpreterResult, ConstraintError> {
    let clauses = split_clauses(command);
    if clauses.is_empty() {
        return Err(ConstraintError::EmptyCommand);
    }
    let constraints = clauses
        .iter()
        .enumerate()
        .map(|(i, c)| interpret_clause(c, scene, i as u32))
        .collect::<Result<Vec<_>, _>>()?;
    let set = ConstraintSet::new(constraints, command);
    set.validate(scene)?;
    Ok(InterpreterResult::from_set(set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Pose, Primitive};

    fn scene() -> Vec<SceneObject> {
        let ball = Primitive::Sphere { radius: 0.1 };
        vec![
            SceneObject::new("obj_0", "table", ball, Pose::identity()),
            SceneObject::new("obj_1", "chair", ball, Pose::identity()),
            SceneObject::new("obj_2", "glass", ball, Pose::identity()),
            SceneObject::new("obj_3", "coffee mug", ball, Pose::identity()),
        ]
    }

    fn one(cmd: &str) -> Constraint {
        let r = interpret_command_template(cmd, &scene()).unwrap();
        assert_eq!(r.constraint_set.len(), 1, "{cmd}");
        r.constraint_set.constraints[0].clone()
    }

    #[test]
    fn go_more_to_the_right() {
        let c = one("go more to the right");
        assert_eq!(c.kind, ConstraintKind::CartesianShift { direction: Vec3::x() });
        assert_eq!(c.target, None);
        assert_eq!(c.intensity, 1.0);
    }

    #[test]
    fn slow_down_next_to_table() {
        let c = one("slow down when next to the table");
        assert_eq!(c.kind, ConstraintKind::SpeedChange { sign: Sign::Minus });
        assert_eq!(c.target.as_deref(), Some("obj_0"));
    }

    #[test]
    fn two_clauses_get_ordered_priorities() {
        let r = interpret_command_template(
            "move closer to the chair and go slower near the glass",
            &scene(),
        )
        .unwrap();
        let cs = &r.constraint_set.constraints;
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[0].kind, ConstraintKind::ObjectDistance { sign: Sign::Minus });
        assert_eq!(cs[0].target.as_deref(), Some("obj_1"));
        assert_eq!(cs[0].priority, 0);
        assert_eq!(cs[1].kind, ConstraintKind::SpeedChange { sign: Sign::Minus });
        assert_eq!(cs[1].target.as_deref(), Some("obj_2"));
        assert_eq!(cs[1].priority, 1);
        assert_eq!(r.constraint_set.source_command, "move closer to the chair and go slower near the glass");
    }

    #[test]
    fn modifiers_targets_and_synonyms() {
        let c = one("stay much farther away from the coffee mug");
        assert_eq!(c.kind, ConstraintKind::ObjectDistance { sign: Sign::Plus });
        assert_eq!(c.target.as_deref(), Some("obj_3"));
        assert_eq!(c.intensity, 1.5);

        let c = one("speed up a bit around the chair");
        assert_eq!(c.kind, ConstraintKind::SpeedChange { sign: Sign::Plus });
        assert_eq!(c.intensity, 0.5);

        let c = one("go slightly higher near the table");
        assert_eq!(c.kind, ConstraintKind::CartesianShift { direction: Vec3::z() });
        assert_eq!(c.target.as_deref(), Some("obj_0"));
        assert_eq!(c.intensity, 0.5);

        let c = one("Move to the BACK!");
        assert_eq!(c.kind, ConstraintKind::CartesianShift { direction: -Vec3::y() });
    }

    #[test]
    fn commas_and_then_split_clauses() {
        let r = interpret_command_template("go left, move closer to the table then go faster near the chair", &scene()).unwrap();
        assert_eq!(r.constraint_set.len(), 3);
        assert_eq!(r.constraint_set.priority_order(), vec![0, 1, 2]);
    }

    #[test]
    fn rejects_instead_of_guessing() {
        assert!(matches!(
            interpret_command_template("please do a barrel roll", &scene()),
            Err(ConstraintError::UnrecognizedClause(_))
        ));
        assert!(matches!(
            interpret_command_template("   ", &scene()),
            Err(ConstraintError::EmptyCommand)
        ));
        assert!(matches!(
            interpret_command_template("move closer", &scene()),
            Err(ConstraintError::UnrecognizedClause(_))
        ));
        assert!(matches!(
            interpret_command_template("go faster near the piano", &scene()),
            Err(ConstraintError::UnknownObject { .. })
        ));
        assert!(matches!(
            interpret_command_template("go right and wiggle", &scene()),
            Err(ConstraintError::UnrecognizedClause(c)) if c == "wiggle"
        ));
    }

    #[test]
    fn pure_function() {
        let a = interpret_command_template("go up and move away from the glass", &scene()).unwrap();
        let b = interpret_command_template("go up and move away from the glass", &scene()).unwrap();
        assert_eq!(a, b);
    }
}
