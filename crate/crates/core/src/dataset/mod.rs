//! Reproducible benchmark samples: a random smooth trajectory, a few
//! non-overlapping objects around it and a command in the template grammar
//! whose constraints are known exactly.

mod files;

pub use files::{read_dataset, write_dataset, Manifest, ManifestEntry, MANIFEST_FILE};

use nalgebra::UnitQuaternion;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::constraint::{
    parse_constraint_document, serialize_constraint_set, Constraint, ConstraintKind, ConstraintSet, Sign,
};
use crate::geometry::{Pose, Primitive, SceneObject, Vec3};
use crate::registration::sample_surface;
use crate::trajectory::{resample, Trajectory, TrajectoryError, Waypoint};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("could not place {wanted} objects after {tries} tries")]
    PlacementBudget { wanted: usize, tries: usize },
    #[error("need at least 4 control points, got {0}")]
    ControlPoints(usize),
    #[error("object count must be 1 to {max}, got {got}", max = OBJECT_NAMES.len())]
    ObjectCount { got: usize },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error("{path}: {message}")]
    File { path: String, message: String },
}

/// Names given to generated objects, in draw order.
pub const OBJECT_NAMES: [&str; 10] = [
    "table", "chair", "glass", "vase", "box", "ball", "lamp", "bottle", "cup", "plant",
];

/// Tries allowed when placing one scene.
pub const PLACEMENT_TRIES: usize = 1000;
/// Required clearance between objects and between objects and the path.
pub const CLEARANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    /// One clause.
    Single,
    /// Two clauses on distinct objects and axes.
    Multi,
    /// Three or four clauses, targets may repeat.
    Complex,
}

impl SampleKind {
    pub const ALL: [SampleKind; 3] = [SampleKind::Single, SampleKind::Multi, SampleKind::Complex];
}

/// One benchmark case.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub seed: u64,
    pub kind: SampleKind,
    pub trajectory: Trajectory,
    pub scene: Vec<SceneObject>,
    pub command_text: String,
    pub ground_truth: ConstraintSet,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleDoc {
    seed: u64,
    kind: SampleKind,
    command: String,
    trajectory: Trajectory,
    objects: Vec<SceneObject>,
    ground_truth: serde_json::Value,
}

impl Serialize for Sample {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        SampleDoc {
            seed: self.seed,
            kind: self.kind,
            command: self.command_text.clone(),
            trajectory: self.trajectory.clone(),
            objects: self.scene.clone(),
            ground_truth: serialize_constraint_set(&self.ground_truth),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Sample {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = SampleDoc::deserialize(deserializer)?;
        let ground_truth = parse_constraint_document(&doc.ground_truth.to_string(), &doc.objects)
            .map_err(serde::de::Error::custom)?;
        Ok(Sample {
            seed: doc.seed,
            kind: doc.kind,
            trajectory: doc.trajectory,
            scene: doc.objects,
            command_text: doc.command,
            ground_truth,
        })
    }
}

/// Independent seed for one stage of generation.
fn stream(seed: u64, stage: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stage);
    rng
}

/// Smooth random path: `control_points` positions uniform in
/// `[-0.8, 0.8]^3` with speeds uniform in `[0.3, 1.0]`, spline-resampled to
/// `n` waypoints.
pub fn random_trajectory(seed: u64, control_points: usize, n: usize) -> Result<Trajectory, DatasetError> {
    if control_points < 4 {
        return Err(DatasetError::ControlPoints(control_points));
    }
    let mut rng = stream(seed, 0);
    let control: Vec<Waypoint> = (0..control_points)
        .map(|_| {
            let p = Vec3::new(
                rng.random_range(-0.8..=0.8),
                rng.random_range(-0.8..=0.8),
                rng.random_range(-0.8..=0.8),
            );
            Waypoint::new(p, rng.random_range(0.3..=1.0))
        })
        .collect();
    Ok(resample(&Trajectory::new(control)?, n)?)
}

fn random_primitive(rng: &mut impl Rng) -> Primitive {
    let shape = rng.random_range(0..4);
    let mut dim = || rng.random_range(0.1..=0.4);
    match shape {
        0 => Primitive::Sphere { radius: dim() },
        1 => Primitive::Cylinder { radius: dim(), half_length: dim() },
        2 => Primitive::Cone { base_radius: dim(), height: dim() },
        _ => Primitive::Cuboid { half_extents: Vec3::new(dim(), dim(), dim()) },
    }
}

fn random_rotation(rng: &mut impl Rng) -> UnitQuaternion<f64> {
    // Uniform over SO(3) from three uniforms (Shoemake).
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let tau = std::f64::consts::TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    UnitQuaternion::from_quaternion(nalgebra::Quaternion::new(
        a * (tau * u2).sin(),
        a * (tau * u2).cos(),
        b * (tau * u3).sin(),
        b * (tau * u3).cos(),
    ))
}

/// Whether two objects keep at least `gap` apart, judged from dense surface
/// samples of each measured against the other.
fn separated(a: &SceneObject, b: &SceneObject, gap: f64) -> bool {
    if (a.center() - b.center()).norm() > a.primitive.bounding_radius() + b.primitive.bounding_radius() + gap {
        return true;
    }
    let clear = |x: &SceneObject, y: &SceneObject| {
        sample_surface(&x.primitive, &x.pose, 800, 0)
            .iter()
            .all(|p| y.proximity(p).signed_distance > gap)
    };
    clear(a, b) && clear(b, a)
}

/// `m` objects with shapes uniform over sphere, cylinder, cone and cuboid,
/// dimensions in `[0.1, 0.4]`, random orientation and centres in
/// `[-0.6, 0.6]^3`. Objects keep [`CLEARANCE`] from each other and from
/// every waypoint of `trajectory`.
pub fn random_scene(seed: u64, m: usize, trajectory: &Trajectory) -> Result<Vec<SceneObject>, DatasetError> {
    if m == 0 || m > OBJECT_NAMES.len() {
        return Err(DatasetError::ObjectCount { got: m });
    }
    let mut rng = stream(seed, 1);
    let positions = trajectory.positions();
    let mut names = OBJECT_NAMES.to_vec();
    names.shuffle(&mut rng);
    let mut objects: Vec<SceneObject> = Vec::with_capacity(m);
    for _ in 0..PLACEMENT_TRIES {
        if objects.len() == m {
            break;
        }
        let i = objects.len();
        let center = Vec3::new(
            rng.random_range(-0.6..=0.6),
            rng.random_range(-0.6..=0.6),
            rng.random_range(-0.6..=0.6),
        );
        let primitive = random_primitive(&mut rng);
        let rotation = random_rotation(&mut rng);
        let fragility = (rng.random_range(0.0..=1.0f64) * 100.0).round() / 100.0;
        // Place so the bounding-box centre lands on `center`.
        let position = center - rotation * primitive.local_center();
        let object = SceneObject::new(format!("obj_{i}"), names[i], primitive, Pose::new(position, rotation))
            .with_fragility(fragility);
        let path_clear = positions.iter().all(|p| object.proximity(p).signed_distance > CLEARANCE);
        if path_clear && objects.iter().all(|o| separated(o, &object, CLEARANCE)) {
            objects.push(object);
        }
    }
    if objects.len() < m {
        return Err(DatasetError::PlacementBudget { wanted: m, tries: PLACEMENT_TRIES });
    }
    Ok(objects)
}

/// The three constraint families a clause can express.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClauseKind {
    Cartesian,
    Speed,
    Distance,
}

const AXES: [(&str, [f64; 3]); 6] = [
    ("to the right", [1.0, 0.0, 0.0]),
    ("to the left", [-1.0, 0.0, 0.0]),
    ("forward", [0.0, 1.0, 0.0]),
    ("back", [0.0, -1.0, 0.0]),
    ("higher", [0.0, 0.0, 1.0]),
    ("lower", [0.0, 0.0, -1.0]),
];

/// Intensity word and value: none, soft or strong.
fn modifier(rng: &mut impl Rng) -> (&'static str, f64) {
    *[("", 1.0), ("", 1.0), ("slightly ", 0.5), ("a bit ", 0.5), ("much ", 1.5), ("significantly ", 1.5)]
        .choose(rng)
        .expect("non-empty")
}

/// Render one clause and its constraint. `axis` indexes [`AXES`];
/// `local` restricts a Cartesian shift to the target's surroundings.
fn clause(
    rng: &mut impl Rng,
    kind: ClauseKind,
    target: &SceneObject,
    axis: usize,
    local: bool,
    priority: u32,
) -> (String, Constraint) {
    let (word, intensity) = modifier(rng);
    let name = &target.name;
    let (text, constraint) = match kind {
        ClauseKind::Distance => {
            let sign = if rng.random::<bool>() { Sign::Plus } else { Sign::Minus };
            let text = match (sign, rng.random_range(0..2)) {
                (Sign::Minus, 0) => format!("move {word}closer to the {name}"),
                (Sign::Minus, _) => format!("get {word}nearer to the {name}"),
                (Sign::Plus, 0) => format!("stay {word}farther from the {name}"),
                (Sign::Plus, _) => format!("move {word}away from the {name}"),
            };
            (text, Constraint::distance(sign, &target.id))
        }
        ClauseKind::Speed => {
            let sign = if rng.random::<bool>() { Sign::Plus } else { Sign::Minus };
            let place = ["near", "around", "next to", "close to"].choose(rng).expect("non-empty");
            let text = match (sign, rng.random_range(0..2)) {
                (Sign::Minus, 0) => format!("slow down {word}when {place} the {name}"),
                (Sign::Minus, _) => format!("go {word}slower {place} the {name}"),
                (Sign::Plus, 0) => format!("speed up {word}when {place} the {name}"),
                (Sign::Plus, _) => format!("go {word}faster {place} the {name}"),
            };
            (text, Constraint::speed(sign, &target.id))
        }
        ClauseKind::Cartesian => {
            let (phrase, d) = AXES[axis];
            let direction = Vec3::new(d[0], d[1], d[2]);
            let mut c = Constraint::cartesian(direction);
            let text = if local {
                c = c.with_target(&target.id);
                format!("go {word}{phrase} near the {name}")
            } else {
                format!("go {word}more {phrase}")
            };
            (text, c)
        }
    };
    (text, constraint.with_intensity(intensity).with_priority(priority))
}

fn clause_kind(rng: &mut impl Rng) -> ClauseKind {
    *[ClauseKind::Cartesian, ClauseKind::Speed, ClauseKind::Distance]
        .choose(rng)
        .expect("non-empty")
}

/// A full sample. Object count is drawn from 1..=4 (2..=4 for `Multi`).
pub fn generate_sample(seed: u64, kind: SampleKind) -> Result<Sample, DatasetError> {
    let trajectory = random_trajectory(seed, 6, 64)?;
    let mut rng = stream(seed, 2);
    let min_objects = if kind == SampleKind::Multi { 2 } else { 1 };
    let m = rng.random_range(min_objects..=4);
    let scene = random_scene(seed, m, &trajectory)?;

    let clauses = match kind {
        SampleKind::Single => 1,
        SampleKind::Multi => 2,
        SampleKind::Complex => rng.random_range(3..=4),
    };
    let mut texts = Vec::with_capacity(clauses);
    let mut constraints = Vec::with_capacity(clauses);
    let mut used_targets: Vec<usize> = Vec::new();
    let mut used_axes: Vec<usize> = Vec::new();
    for priority in 0..clauses {
        let kind_of_clause = clause_kind(&mut rng);
        let (target, axis) = if kind == SampleKind::Multi {
            let free: Vec<usize> = (0..scene.len()).filter(|i| !used_targets.contains(i)).collect();
            let target = *free.choose(&mut rng).expect("multi scenes have two objects");
            let axes: Vec<usize> = (0..AXES.len()).filter(|a| !used_axes.iter().any(|u| u / 2 == a / 2)).collect();
            (target, *axes.choose(&mut rng).expect("three axes"))
        } else {
            (rng.random_range(0..scene.len()), rng.random_range(0..AXES.len()))
        };
        let local = rng.random::<bool>();
        let (text, c) = clause(&mut rng, kind_of_clause, &scene[target], axis, local, priority as u32);
        if c.target.is_some() {
            used_targets.push(target);
        }
        if matches!(c.kind, ConstraintKind::CartesianShift { .. }) {
            used_axes.push(axis);
        }
        texts.push(text);
        constraints.push(c);
    }

    let joiners = [", ", " and ", ", then ", " then "];
    let mut command = texts[0].clone();
    for t in &texts[1..] {
        command.push_str(joiners.choose(&mut rng).expect("non-empty"));
        command.push_str(t);
    }
    let ground_truth = ConstraintSet::new(constraints, command.clone());
    Ok(Sample {
        seed,
        kind,
        trajectory,
        scene,
        command_text: command,
        ground_truth,
    })
}

/// Samples `first_seed..first_seed + count` of one kind.
pub fn generate_samples(first_seed: u64, count: usize, kind: SampleKind) -> Result<Vec<Sample>, DatasetError> {
    (first_seed..first_seed + count as u64)
        .map(|s| generate_sample(s, kind))
        .collect()
}
