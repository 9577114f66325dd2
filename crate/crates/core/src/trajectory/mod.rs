//! Position + speed trajectories, scene normalization and spline resampling.

mod spline;

pub use spline::CatmullRom;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{closest_point, Pose, SceneObject, Vec3};

/// Minimum number of waypoints a trajectory may hold.
pub const MIN_WAYPOINTS: usize = 4;
/// Consecutive waypoints closer than this are considered coincident.
pub const MIN_SEGMENT_LENGTH: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("trajectory needs at least {MIN_WAYPOINTS} waypoints, got {0}")]
    TooFewWaypoints(usize),
    #[error("waypoint {0} coincides with its successor")]
    CoincidentWaypoints(usize),
    #[error("waypoint {0} is not finite")]
    NonFinite(usize),
    #[error("waypoint {0} has a negative speed")]
    NegativeSpeed(usize),
    #[error("original waypoints must have the same length as the current ones ({current} vs {original})")]
    LengthMismatch { current: usize, original: usize },
    #[error("scene bounding box has zero extent")]
    ZeroExtent,
    #[error("resample target must be at least {MIN_WAYPOINTS}, got {0}")]
    ResampleTarget(usize),
    #[error("k = {k} exceeds the number of waypoints {n}")]
    TooManyIndices { k: usize, n: usize },
}

/// One trajectory sample: a position and a non-negative scalar speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "WaypointDoc", into = "WaypointDoc")]
pub struct Waypoint {
    pub position: Vec3,
    pub speed: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaypointDoc {
    x: f64,
    y: f64,
    z: f64,
    v: f64,
}

impl From<WaypointDoc> for Waypoint {
    fn from(d: WaypointDoc) -> Self {
        Waypoint::new(Vec3::new(d.x, d.y, d.z), d.v)
    }
}

impl From<Waypoint> for WaypointDoc {
    fn from(w: Waypoint) -> Self {
        WaypointDoc {
            x: w.position.x,
            y: w.position.y,
            z: w.position.z,
            v: w.speed,
        }
    }
}

impl Waypoint {
    pub fn new(position: Vec3, speed: f64) -> Self {
        Waypoint { position, speed }
    }
}

/// An ordered waypoint sequence together with the reference copy it was
/// built from. Optimization forces that preserve shape or penalise
/// deviation are measured against `original_waypoints`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrajectoryDoc", into = "TrajectoryDoc")]
pub struct Trajectory {
    waypoints: Vec<Waypoint>,
    original_waypoints: Vec<Waypoint>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryDoc {
    waypoints: Vec<Waypoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    original_waypoints: Option<Vec<Waypoint>>,
}

impl TryFrom<TrajectoryDoc> for Trajectory {
    type Error = TrajectoryError;

    fn try_from(doc: TrajectoryDoc) -> Result<Self, Self::Error> {
        match doc.original_waypoints {
            Some(original) => Trajectory::with_original(doc.waypoints, original),
            None => Trajectory::new(doc.waypoints),
        }
    }
}

impl From<Trajectory> for TrajectoryDoc {
    fn from(t: Trajectory) -> Self {
        let original = (t.original_waypoints != t.waypoints).then_some(t.original_waypoints);
        TrajectoryDoc {
            waypoints: t.waypoints,
            original_waypoints: original,
        }
    }
}

fn validate_waypoints(waypoints: &[Waypoint]) -> Result<(), TrajectoryError> {
    if waypoints.len() < MIN_WAYPOINTS {
        return Err(TrajectoryError::TooFewWaypoints(waypoints.len()));
    }
    for (i, w) in waypoints.iter().enumerate() {
        if !(w.position.iter().all(|c| c.is_finite()) && w.speed.is_finite()) {
            return Err(TrajectoryError::NonFinite(i));
        }
        if w.speed < 0.0 {
            return Err(TrajectoryError::NegativeSpeed(i));
        }
    }
    for (i, pair) in waypoints.windows(2).enumerate() {
        if (pair[1].position - pair[0].position).norm() <= MIN_SEGMENT_LENGTH {
            return Err(TrajectoryError::CoincidentWaypoints(i));
        }
    }
    Ok(())
}

impl Trajectory {
    /// Validate `waypoints` and capture them as the reference copy.
    pub fn new(waypoints: Vec<Waypoint>) -> Result<Self, TrajectoryError> {
        validate_waypoints(&waypoints)?;
        Ok(Trajectory {
            original_waypoints: waypoints.clone(),
            waypoints,
        })
    }

    pub fn with_original(
        waypoints: Vec<Waypoint>,
        original_waypoints: Vec<Waypoint>,
    ) -> Result<Self, TrajectoryError> {
        if waypoints.len() != original_waypoints.len() {
            return Err(TrajectoryError::LengthMismatch {
                current: waypoints.len(),
                original: original_waypoints.len(),
            });
        }
        validate_waypoints(&waypoints)?;
        validate_waypoints(&original_waypoints)?;
        Ok(Trajectory {
            waypoints,
            original_waypoints,
        })
    }

    /// Convenience constructor from positions with a constant speed.
    pub fn from_positions(positions: &[Vec3], speed: f64) -> Result<Self, TrajectoryError> {
        Trajectory::new(positions.iter().map(|p| Waypoint::new(*p, speed)).collect())
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    pub fn original_waypoints(&self) -> &[Waypoint] {
        &self.original_waypoints
    }

    pub fn positions(&self) -> Vec<Vec3> {
        self.waypoints.iter().map(|w| w.position).collect()
    }

    pub fn original_positions(&self) -> Vec<Vec3> {
        self.original_waypoints.iter().map(|w| w.position).collect()
    }

    pub fn speeds(&self) -> Vec<f64> {
        self.waypoints.iter().map(|w| w.speed).collect()
    }

    /// Copy of this trajectory whose reference is its current state.
    pub fn rebased(&self) -> Trajectory {
        Trajectory {
            waypoints: self.waypoints.clone(),
            original_waypoints: self.waypoints.clone(),
        }
    }

    /// Replace the current positions, keeping speeds and the reference.
    pub fn with_positions(&self, positions: &[Vec3]) -> Result<Trajectory, TrajectoryError> {
        let waypoints = self
            .waypoints
            .iter()
            .zip(positions)
            .map(|(w, p)| Waypoint::new(*p, w.speed))
            .collect::<Vec<_>>();
        Trajectory::with_original(waypoints, self.original_waypoints.clone())
    }

    /// Replace the current speeds, keeping positions and the reference.
    pub fn with_speeds(&self, speeds: &[f64]) -> Result<Trajectory, TrajectoryError> {
        let waypoints = self
            .waypoints
            .iter()
            .zip(speeds)
            .map(|(w, v)| Waypoint::new(w.position, *v))
            .collect::<Vec<_>>();
        Trajectory::with_original(waypoints, self.original_waypoints.clone())
    }

    pub fn arc_length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|p| (p[1].position - p[0].position).norm())
            .sum()
    }

    /// Mean Euclidean distance between current and reference positions.
    pub fn mean_deviation(&self) -> f64 {
        let total: f64 = self
            .waypoints
            .iter()
            .zip(&self.original_waypoints)
            .map(|(a, b)| (a.position - b.position).norm())
            .sum();
        total / self.len() as f64
    }
}

/// Isotropic map from workspace units to the normalized frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTransform {
    pub spatial_center: Vec3,
    pub spatial_scale: f64,
    pub speed_scale: f64,
}

impl NormalizationTransform {
    pub fn identity() -> Self {
        NormalizationTransform {
            spatial_center: Vec3::zeros(),
            spatial_scale: 1.0,
            speed_scale: 1.0,
        }
    }

    pub fn normalize_point(&self, p: &Vec3) -> Vec3 {
        (p - self.spatial_center) / self.spatial_scale
    }

    pub fn denormalize_point(&self, p: &Vec3) -> Vec3 {
        p * self.spatial_scale + self.spatial_center
    }

    fn map_waypoints(&self, w: &[Waypoint], forward: bool) -> Vec<Waypoint> {
        w.iter()
            .map(|w| {
                if forward {
                    Waypoint::new(self.normalize_point(&w.position), w.speed / self.speed_scale)
                } else {
                    Waypoint::new(self.denormalize_point(&w.position), w.speed * self.speed_scale)
                }
            })
            .collect()
    }

    pub fn normalize_trajectory(&self, t: &Trajectory) -> Result<Trajectory, TrajectoryError> {
        Trajectory::with_original(
            self.map_waypoints(&t.waypoints, true),
            self.map_waypoints(&t.original_waypoints, true),
        )
    }

    pub fn normalize_object(&self, object: &SceneObject) -> SceneObject {
        let mut out = object.clone();
        out.pose = Pose::new(self.normalize_point(&object.pose.position), object.pose.orientation);
        out.primitive = object.primitive.scaled(1.0 / self.spatial_scale);
        out.influence_radius = object.influence_radius / self.spatial_scale;
        out
    }

    pub fn denormalize_object(&self, object: &SceneObject) -> SceneObject {
        let mut out = object.clone();
        out.pose = Pose::new(self.denormalize_point(&object.pose.position), object.pose.orientation);
        out.primitive = object.primitive.scaled(self.spatial_scale);
        out.influence_radius = object.influence_radius * self.spatial_scale;
        out
    }
}

/// Map the joint bounding box of waypoints and object centres into
/// [-1, 1]^3 with a single isotropic scale, and divide speeds by the
/// maximum speed (left alone when every speed is zero).
pub fn normalize_scene(
    trajectory: &Trajectory,
    objects: &[SceneObject],
) -> Result<(Trajectory, Vec<SceneObject>, NormalizationTransform), TrajectoryError> {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    let points = trajectory
        .waypoints
        .iter()
        .map(|w| w.position)
        .chain(objects.iter().map(|o| o.pose.position));
    for p in points {
        lo = lo.inf(&p);
        hi = hi.sup(&p);
    }
    let half = (hi - lo) * 0.5;
    let scale = half.max();
    if !(scale.is_finite() && scale > 0.0) {
        return Err(TrajectoryError::ZeroExtent);
    }
    let max_speed = trajectory
        .waypoints
        .iter()
        .map(|w| w.speed)
        .fold(0.0_f64, f64::max);
    let transform = NormalizationTransform {
        spatial_center: (lo + hi) * 0.5,
        spatial_scale: scale,
        speed_scale: if max_speed > 0.0 { max_speed } else { 1.0 },
    };
    let traj = transform.normalize_trajectory(trajectory)?;
    let objs = objects.iter().map(|o| transform.normalize_object(o)).collect();
    Ok((traj, objs, transform))
}

/// Exact inverse of the normalization applied by [`normalize_scene`].
pub fn denormalize(
    trajectory: &Trajectory,
    transform: &NormalizationTransform,
) -> Result<Trajectory, TrajectoryError> {
    Trajectory::with_original(
        transform.map_waypoints(&trajectory.waypoints, false),
        transform.map_waypoints(&trajectory.original_waypoints, false),
    )
}

/// Resample onto `target_n` points at uniform arc-length spacing along a
/// centripetal Catmull-Rom spline through the current positions. Speeds are
/// interpolated linearly in arc length. The result is its own reference.
pub fn resample(trajectory: &Trajectory, target_n: usize) -> Result<Trajectory, TrajectoryError> {
    if target_n < MIN_WAYPOINTS {
        return Err(TrajectoryError::ResampleTarget(target_n));
    }
    let spline = CatmullRom::new(&trajectory.positions());
    let knot_arc = spline.knot_arc_lengths();
    let total = spline.total_length();
    let speeds = trajectory.speeds();
    let n_in = trajectory.len();

    let mut out = Vec::with_capacity(target_n);
    for i in 0..target_n {
        let waypoint = if i == 0 {
            trajectory.waypoints[0]
        } else if i == target_n - 1 {
            trajectory.waypoints[n_in - 1]
        } else {
            let s = total * i as f64 / (target_n - 1) as f64;
            let position = spline.point_at_arc_length(s);
            let seg = knot_arc.partition_point(|&k| k <= s).clamp(1, n_in - 1) - 1;
            let span = knot_arc[seg + 1] - knot_arc[seg];
            let u = if span > 0.0 {
                ((s - knot_arc[seg]) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let speed = speeds[seg] + (speeds[seg + 1] - speeds[seg]) * u;
            Waypoint::new(position, speed)
        };
        out.push(waypoint);
    }
    Trajectory::new(out)
}

/// Indices of the `k` waypoints with the smallest signed distance to the
/// object surface, ascending by distance with ties going to the lower index.
pub fn closest_waypoint_indices(
    trajectory: &Trajectory,
    object: &SceneObject,
    k: usize,
) -> Result<Vec<usize>, TrajectoryError> {
    if k > trajectory.len() {
        return Err(TrajectoryError::TooManyIndices {
            k,
            n: trajectory.len(),
        });
    }
    let mut ranked: Vec<(f64, usize)> = trajectory
        .waypoints
        .iter()
        .enumerate()
        .map(|(i, w)| (closest_point(&w.position, object).signed_distance, i))
        .collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(ranked.into_iter().take(k).map(|(_, i)| i).collect())
}
