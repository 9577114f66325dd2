use serde::{Deserialize, Serialize};

use crate::constraint::{Constraint, ConstraintKind, ConstraintSet};
use crate::geometry::SceneObject;
use crate::trajectory::{closest_waypoint_indices, Trajectory};

/// Number of closest waypoints compared by the distance and speed checks.
pub const CHECK_POINTS: usize = 5;

fn default_distance() -> f64 {
    0.05
}
fn default_cartesian() -> f64 {
    0.05
}
fn default_speed() -> f64 {
    0.10
}

/// Minimum effect each check requires. Distances are in normalized units,
/// speed is relative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default = "default_distance")]
    pub distance: f64,
    #[serde(default = "default_cartesian")]
    pub cartesian: f64,
    #[serde(default = "default_speed")]
    pub speed: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            distance: default_distance(),
            cartesian: default_cartesian(),
            speed: default_speed(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Distance,
    Cartesian,
    Speed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    /// Index into the constraint set.
    pub constraint_id: usize,
    pub kind: CheckKind,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

fn target<'a>(constraint: &Constraint, scene: &'a [SceneObject]) -> Option<&'a SceneObject> {
    let id = constraint.target.as_ref()?;
    scene.iter().find(|o| &o.id == id)
}

fn signed_pass(sign: f64, measured: f64, threshold: f64) -> bool {
    measured * sign >= threshold
}

fn closest(before: &Trajectory, object: &SceneObject) -> Vec<usize> {
    closest_waypoint_indices(before, object, CHECK_POINTS.min(before.len())).expect("k is at most len")
}

/// Change in mean surface distance of the five waypoints that were closest
/// to the target before the modification.
pub fn check_distance(
    id: usize,
    before: &Trajectory,
    after: &Trajectory,
    constraint: &Constraint,
    scene: &[SceneObject],
    threshold: f64,
) -> CheckOutcome {
    let mut outcome = CheckOutcome {
        constraint_id: id,
        kind: CheckKind::Distance,
        measured: 0.0,
        threshold,
        passed: false,
    };
    let (ConstraintKind::ObjectDistance { sign }, Some(object)) = (constraint.kind, target(constraint, scene)) else {
        return outcome;
    };
    let idx = closest(before, object);
    let mean = |t: &Trajectory| {
        idx.iter()
            .map(|&i| object.proximity(&t.waypoints()[i].position).signed_distance)
            .sum::<f64>()
            / idx.len() as f64
    };
    outcome.measured = mean(after) - mean(before);
    outcome.passed = signed_pass(sign.value(), outcome.measured, threshold);
    outcome
}

/// Mean displacement along the shift direction over the affected
/// waypoints: all of them for a global shift, else those within the
/// target's influence radius before the modification.
pub fn check_cartesian(
    id: usize,
    before: &Trajectory,
    after: &Trajectory,
    constraint: &Constraint,
    scene: &[SceneObject],
    threshold: f64,
) -> CheckOutcome {
    let mut outcome = CheckOutcome {
        constraint_id: id,
        kind: CheckKind::Cartesian,
        measured: 0.0,
        threshold,
        passed: false,
    };
    let ConstraintKind::CartesianShift { direction } = constraint.kind else {
        return outcome;
    };
    let object = target(constraint, scene);
    let mut total = 0.0;
    let mut count = 0usize;
    for (b, a) in before.waypoints().iter().zip(after.waypoints()) {
        let affected = match object {
            None => true,
            Some(o) => o.proximity(&b.position).signed_distance <= o.influence_radius,
        };
        if affected {
            total += (a.position - b.position).dot(&direction);
            count += 1;
        }
    }
    if count > 0 {
        outcome.measured = total / count as f64;
    }
    outcome.passed = outcome.measured >= threshold;
    outcome
}

/// Relative change of the mean speed at the five waypoints that were
/// closest to the target before the modification.
pub fn check_speed(
    id: usize,
    before: &Trajectory,
    after: &Trajectory,
    constraint: &Constraint,
    scene: &[SceneObject],
    threshold: f64,
) -> CheckOutcome {
    let mut outcome = CheckOutcome {
        constraint_id: id,
        kind: CheckKind::Speed,
        measured: 0.0,
        threshold,
        passed: false,
    };
    let (ConstraintKind::SpeedChange { sign }, Some(object)) = (constraint.kind, target(constraint, scene)) else {
        return outcome;
    };
    let idx = closest(before, object);
    let mean = |t: &Trajectory| idx.iter().map(|&i| t.waypoints()[i].speed).sum::<f64>() / idx.len() as f64;
    let base = mean(before);
    if base > 0.0 {
        outcome.measured = (mean(after) - base) / base;
    }
    outcome.passed = signed_pass(sign.value(), outcome.measured, threshold);
    outcome
}

/// One outcome per constraint, in constraint order.
pub fn observe(
    before: &Trajectory,
    after: &Trajectory,
    set: &ConstraintSet,
    scene: &[SceneObject],
    thresholds: &Thresholds,
) -> Vec<CheckOutcome> {
    set.constraints
        .iter()
        .enumerate()
        .map(|(i, c)| match c.kind {
            ConstraintKind::ObjectDistance { .. } => check_distance(i, before, after, c, scene, thresholds.distance),
            ConstraintKind::CartesianShift { .. } => check_cartesian(i, before, after, c, scene, thresholds.cartesian),
            ConstraintKind::SpeedChange { .. } => check_speed(i, before, after, c, scene, thresholds.speed),
        })
        .collect()
}
