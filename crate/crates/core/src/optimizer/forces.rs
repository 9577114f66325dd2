use serde::{Deserialize, Serialize};

use super::{OptimizeError, OptimizerParams, PotentialField};
use crate::constraint::ConstraintKind;
use crate::geometry::{closest_point, ProximityResult, SceneObject, Vec3};

/// How objects are seen by the force field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProximityModel {
    /// Exact closest points on the object's primitive surface.
    #[default]
    Geometric,
    /// The object collapsed to the centre of its bounding box. This is the
    /// point-based baseline used for comparisons; it ignores shape.
    Centroid,
}

impl ProximityModel {
    pub fn proximity(&self, query: &Vec3, object: &SceneObject) -> ProximityResult {
        match self {
            ProximityModel::Geometric => closest_point(query, object),
            ProximityModel::Centroid => {
                let center = object.center();
                let offset = query - center;
                let dist = offset.norm();
                let normal = if dist > 1e-12 { offset / dist } else { Vec3::x() };
                ProximityResult {
                    closest_point: center,
                    signed_distance: dist,
                    outward_normal: normal,
                }
            }
        }
    }
}

/// Segment springs toward the reference segment lengths.
///
/// `f_j = k (|w_{j+1} - w_j| - |w0_{j+1} - w0_j|) unit(w_{j+1} - w_j)` for
/// each segment, and waypoint `j` receives `f_j - f_{j-1}` (the end
/// waypoints see only their one incident segment). A stretched segment pulls
/// its two waypoints together.
pub fn spring_forces(current: &[Vec3], original: &[Vec3], k: f64) -> Result<Vec<Vec3>, OptimizeError> {
    let n = current.len();
    let mut segment = Vec::with_capacity(n.saturating_sub(1));
    for j in 0..n.saturating_sub(1) {
        let d = current[j + 1] - current[j];
        let len = d.norm();
        if len <= crate::trajectory::MIN_SEGMENT_LENGTH {
            return Err(OptimizeError::CoincidentWaypoints(j));
        }
        let rest = (original[j + 1] - original[j]).norm();
        segment.push(d * (k * (len - rest) / len));
    }
    let mut forces = vec![Vec3::zeros(); n];
    for (j, f) in segment.iter().enumerate() {
        forces[j] += f;
        forces[j + 1] -= f;
    }
    Ok(forces)
}

/// Curvature regularization.
///
/// `c_j = (w_{j+2} - w_{j+1})/2 - (w_{j+1} - w_j)/2` and waypoint `j+1`
/// receives `k_ang (|c_j| - |c0_j|) c_j / |c_j|`; zero where `|c_j|`
/// vanishes. Waypoints `j` and `j+2` get no reaction force.
pub fn curvature_forces(current: &[Vec3], original: &[Vec3], k_ang: f64) -> Vec<Vec3> {
    let n = current.len();
    let mut forces = vec![Vec3::zeros(); n];
    let half_second_diff = |w: &[Vec3], j: usize| (w[j + 2] - w[j + 1]) * 0.5 - (w[j + 1] - w[j]) * 0.5;
    for j in 0..n.saturating_sub(2) {
        let c = half_second_diff(current, j);
        let norm = c.norm();
        if norm < 1e-12 {
            continue;
        }
        let c0 = half_second_diff(original, j).norm();
        forces[j + 1] = c * (k_ang * (norm - c0) / norm);
    }
    forces
}

/// Pull back toward the reference path: `-w_self (w_j - w0_j)`.
pub fn self_adherence_force(current: &[Vec3], original: &[Vec3], w_self: f64) -> Vec<Vec3> {
    current
        .iter()
        .zip(original)
        .map(|(c, o)| (c - o) * -w_self)
        .collect()
}

/// External force on one waypoint: constraint fields plus obstacle shells,
/// scaled by `w_ext`.
///
/// * distance: `sign * gain * (1 - d/r)` along the outward normal inside the
///   field radius `r`. Attraction (`sign = -1`) fades linearly to zero between
///   two standoffs and the standoff (`obstacle_range`), so it never pulls
///   into the repulsion shell.
/// * cartesian: `gain * direction` on every waypoint, or only on waypoints
///   whose reference position `anchor` lies within `r` of the target. Using
///   the reference keeps the affected set fixed while the path moves.
/// * speed: no positional force.
/// * every object repels with `obstacle_gain * (1 - d/obstacle_range)` inside
///   its shell and `obstacle_gain` inside the solid.
pub fn external_force(
    point: &Vec3,
    anchor: &Vec3,
    fields: &[PotentialField],
    scene: &[SceneObject],
    params: &OptimizerParams,
) -> Vec3 {
    let model = params.proximity;
    let standoff = params.obstacle_range;
    let mut g = Vec3::zeros();

    for field in fields {
        match field.constraint.kind {
            ConstraintKind::ObjectDistance { sign } => {
                let Some(object) = &field.object else { continue };
                let r = model.proximity(point, object);
                let d = r.signed_distance;
                if d > field.influence_radius {
                    continue;
                }
                let falloff = (1.0 - d / field.influence_radius).min(1.0);
                let mut magnitude = sign.value() * field.gain() * falloff;
                if sign.value() < 0.0 {
                    magnitude *= ((d - standoff) / standoff).clamp(0.0, 1.0);
                }
                g += r.outward_normal * magnitude;
            }
            ConstraintKind::CartesianShift { direction } => {
                let active = match &field.object {
                    None => true,
                    Some(object) => model.proximity(anchor, object).signed_distance <= field.influence_radius,
                };
                if active {
                    g += direction * field.gain();
                }
            }
            ConstraintKind::SpeedChange { .. } => {}
        }
    }

    for object in scene {
        let r = model.proximity(point, object);
        if r.signed_distance < params.obstacle_range {
            let falloff = (1.0 - r.signed_distance / params.obstacle_range).min(1.0);
            g += r.outward_normal * (params.obstacle_gain * falloff);
        }
    }

    g * params.w_ext
}
