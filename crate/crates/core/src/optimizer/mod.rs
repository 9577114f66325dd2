//! Iterative potential-field reshaping.
//!
//! Each iteration sums four forces per waypoint (segment springs, curvature
//! regularization, external constraint/obstacle field, adherence to the
//! reference path) from a snapshot of the current positions and moves every
//! interior waypoint by `eta * force`. Endpoints never move. Speeds are not
//! part of the position update; [`apply_speed_profile`] rescales them once
//! the shape has settled.

mod forces;

pub use forces::{
    curvature_forces, external_force, self_adherence_force, spring_forces, ProximityModel,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraint::{Constraint, ConstraintKind};
use crate::geometry::{SceneObject, Vec3};
use crate::trajectory::{Trajectory, TrajectoryError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("non-finite force at iteration {iteration}, waypoint {waypoint}")]
    NonFiniteForce { iteration: usize, waypoint: usize },
    #[error("waypoint {0} coincides with its successor")]
    CoincidentWaypoints(usize),
    #[error("constraint targets unknown object `{0}`")]
    UnknownObject(String),
    #[error("invalid optimizer parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

fn default_k() -> f64 {
    1.0
}
fn default_k_ang() -> f64 {
    0.5
}
fn default_w_ext() -> f64 {
    1.0
}
fn default_w_self() -> f64 {
    4.0
}
fn default_eta() -> f64 {
    0.02
}
fn default_max_iterations() -> usize {
    200
}
fn default_epsilon() -> f64 {
    1e-5
}
fn default_obstacle_range() -> f64 {
    0.05
}
fn default_obstacle_gain() -> f64 {
    2.0
}

/// Force weights and iteration controls. All lengths are in normalized units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerParams {
    /// Segment spring stiffness.
    #[serde(default = "default_k")]
    pub k: f64,
    /// Curvature stiffness.
    #[serde(default = "default_k_ang")]
    pub k_ang: f64,
    /// Weight of the external field.
    #[serde(default = "default_w_ext")]
    pub w_ext: f64,
    /// Weight pulling waypoints back to the reference path.
    #[serde(default = "default_w_self")]
    pub w_self: f64,
    /// Step size.
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    /// Stop once no waypoint would move farther than this in one step.
    #[serde(default = "default_epsilon")]
    pub convergence_epsilon: f64,
    /// Range of the per-object repulsion shell; also the standoff at which
    /// attraction toward a target fades out.
    #[serde(default = "default_obstacle_range")]
    pub obstacle_range: f64,
    #[serde(default = "default_obstacle_gain")]
    pub obstacle_gain: f64,
    #[serde(default)]
    pub proximity: ProximityModel,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        OptimizerParams {
            k: default_k(),
            k_ang: default_k_ang(),
            w_ext: default_w_ext(),
            w_self: default_w_self(),
            eta: default_eta(),
            max_iterations: default_max_iterations(),
            convergence_epsilon: default_epsilon(),
            obstacle_range: default_obstacle_range(),
            obstacle_gain: default_obstacle_gain(),
            proximity: ProximityModel::Geometric,
        }
    }
}

impl OptimizerParams {
    pub fn validate(&self) -> Result<(), OptimizeError> {
        let positive = [
            ("k", self.k),
            ("k_ang", self.k_ang),
            ("w_ext", self.w_ext),
            ("eta", self.eta),
            ("obstacle_range", self.obstacle_range),
            ("convergence_epsilon", self.convergence_epsilon),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(OptimizeError::InvalidParameter { name, value });
            }
        }
        for (name, value) in [("w_self", self.w_self), ("obstacle_gain", self.obstacle_gain)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(OptimizeError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }
}

/// A constraint bound to the object it refers to, with its own field range.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    pub constraint: Constraint,
    pub object: Option<SceneObject>,
    pub influence_radius: f64,
}

impl PotentialField {
    /// Bind `constraint` to its target in `scene`.
    pub fn new(constraint: Constraint, scene: &[SceneObject]) -> Result<Self, OptimizeError> {
        let object = match &constraint.target {
            None => None,
            Some(id) => Some(
                scene
                    .iter()
                    .find(|o| &o.id == id)
                    .cloned()
                    .ok_or_else(|| OptimizeError::UnknownObject(id.clone()))?,
            ),
        };
        let influence_radius = object
            .as_ref()
            .map_or(f64::INFINITY, |o| o.influence_radius);
        Ok(PotentialField {
            constraint,
            object,
            influence_radius,
        })
    }

    pub fn fields_for(constraints: &[Constraint], scene: &[SceneObject]) -> Result<Vec<Self>, OptimizeError> {
        constraints
            .iter()
            .map(|c| PotentialField::new(c.clone(), scene))
            .collect()
    }

    /// intensity × importance
    pub fn gain(&self) -> f64 {
        self.constraint.intensity * self.constraint.importance
    }
}

/// Result of one [`optimize`] run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub trajectory: Trajectory,
    /// Number of position updates applied.
    pub iterations: usize,
    pub converged: bool,
}

/// Sum of the four forces on every waypoint, endpoints pinned to zero.
pub fn total_forces(
    current: &[Vec3],
    original: &[Vec3],
    fields: &[PotentialField],
    scene: &[SceneObject],
    params: &OptimizerParams,
) -> Result<Vec<Vec3>, OptimizeError> {
    let spring = spring_forces(current, original, params.k)?;
    let bend = curvature_forces(current, original, params.k_ang);
    let adhere = self_adherence_force(current, original, params.w_self);
    let n = current.len();
    let mut total = Vec::with_capacity(n);
    for j in 0..n {
        if j == 0 || j == n - 1 {
            total.push(Vec3::zeros());
            continue;
        }
        let ext = external_force(&current[j], &original[j], fields, scene, params);
        total.push(spring[j] + bend[j] + ext + adhere[j]);
    }
    Ok(total)
}

/// Run the fixed-step force iteration on the positions of `trajectory`,
/// measured against its reference waypoints.
///
/// No-penetration holds when the trajectory starts outside every object,
/// `eta * |force| < obstacle_range`, and `obstacle_gain` is at least the
/// largest net push toward an object from the other terms. Attraction
/// toward a target fades to zero at the standoff, so it never needs to be
/// balanced; unbounded Cartesian shifts aimed into an object do.
pub fn optimize(
    trajectory: &Trajectory,
    fields: &[PotentialField],
    scene: &[SceneObject],
    params: &OptimizerParams,
) -> Result<OptimizeOutcome, OptimizeError> {
    params.validate()?;
    let original = trajectory.original_positions();
    let mut current = trajectory.positions();
    let mut iterations = 0;
    let mut converged = false;

    for iteration in 0..params.max_iterations {
        let forces = total_forces(&current, &original, fields, scene, params)?;
        let mut max_step = 0.0_f64;
        for (j, f) in forces.iter().enumerate() {
            if !f.iter().all(|c| c.is_finite()) {
                return Err(OptimizeError::NonFiniteForce {
                    iteration,
                    waypoint: j,
                });
            }
            max_step = max_step.max(params.eta * f.norm());
        }
        if max_step < params.convergence_epsilon {
            converged = true;
            break;
        }
        for (p, f) in current.iter_mut().zip(&forces) {
            *p += *f * params.eta;
        }
        iterations += 1;
    }

    Ok(OptimizeOutcome {
        trajectory: trajectory.with_positions(&current)?,
        iterations,
        converged,
    })
}

/// Lower and upper clamp of the speed scale factor.
pub const SPEED_FACTOR_RANGE: (f64, f64) = (0.05, 3.0);

/// Rescale speeds near the targets of speed-change fields.
///
/// Every waypoint closer than the field's influence radius to the target's
/// surface is scaled by `1 + sign * intensity * importance * (1 - d / r)`.
/// Several fields multiply; the combined factor is clamped to
/// [`SPEED_FACTOR_RANGE`].
pub fn apply_speed_profile(
    trajectory: &Trajectory,
    fields: &[PotentialField],
    model: ProximityModel,
) -> Result<Trajectory, OptimizeError> {
    let mut speeds = trajectory.speeds();
    let speed_fields: Vec<&PotentialField> = fields
        .iter()
        .filter(|f| matches!(f.constraint.kind, ConstraintKind::SpeedChange { .. }))
        .collect();
    if speed_fields.is_empty() {
        return Ok(trajectory.clone());
    }
    for (w, v) in trajectory.waypoints().iter().zip(speeds.iter_mut()) {
        let mut factor = 1.0;
        for field in &speed_fields {
            let (ConstraintKind::SpeedChange { sign }, Some(object)) = (field.constraint.kind, &field.object) else {
                continue;
            };
            let d = model.proximity(&w.position, object).signed_distance;
            if d < field.influence_radius {
                let falloff = (1.0 - d / field.influence_radius).min(1.0);
                factor *= 1.0 + sign.value() * field.gain() * falloff;
            }
        }
        *v *= factor.clamp(SPEED_FACTOR_RANGE.0, SPEED_FACTOR_RANGE.1);
    }
    Ok(trajectory.with_speeds(&speeds)?)
}

#[cfg(test)]
mod tests;
