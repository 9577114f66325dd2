//! Scene, trajectory and point-cloud files.
//!
//! * Scene: JSON `{"objects": [{id, name, shape, dimensions, pose,
//!   fragility?, influence_radius?}]}`.
//! * Trajectory: CSV with columns `x,y,z,v` (header optional) for `.csv`
//!   and `.txt`; otherwise JSON, either an array of `{x,y,z,v}` records or
//!   `{"waypoints": [...]}`.
//! * Point cloud: `.bin` holds little-endian `f32` triplets; `.xyz`, `.txt`,
//!   `.csv` and `.pts` hold one point per line, separated by whitespace or
//!   commas. A sidecar `<stem>.json` gives `{"label": ..., "shape": ...}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{validate_scene, Pose, Primitive, SceneObject, Vec3};
use crate::registration::{PointCloud, ShapeHint};
use crate::trajectory::{Trajectory, Waypoint};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{path}: {message}")]
pub struct InputError {
    pub path: String,
    pub message: String,
}

impl InputError {
    pub fn new(path: impl AsRef<Path>, message: impl ToString) -> Self {
        InputError {
            path: path.as_ref().display().to_string(),
            message: message.to_string(),
        }
    }
}

fn read_text(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError::new(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), InputError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| InputError::new(parent, e))?;
    }
    fs::write(path, text).map_err(|e| InputError::new(path, e))
}

fn default_fragility() -> f64 {
    0.5
}

/// One object as stored in a scene file. The influence radius is optional;
/// when absent the default rule is applied in the normalized frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub id: String,
    pub name: String,
    #[serde(flatten)]
    pub primitive: Primitive,
    pub pose: Pose,
    #[serde(default = "default_fragility")]
    pub fragility: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub influence_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneDocument {
    pub objects: Vec<SceneEntry>,
}

impl SceneDocument {
    /// Entries for `objects`, keeping their influence radii when
    /// `keep_radius` is set.
    pub fn from_objects(objects: &[SceneObject], keep_radius: bool) -> Self {
        SceneDocument {
            objects: objects
                .iter()
                .map(|o| SceneEntry {
                    id: o.id.clone(),
                    name: o.name.clone(),
                    primitive: o.primitive,
                    pose: o.pose,
                    fragility: o.fragility,
                    influence_radius: keep_radius.then_some(o.influence_radius),
                })
                .collect(),
        }
    }

    /// Objects in file units. Missing radii get `default_radius` of the
    /// primitive as stored.
    pub fn objects(&self, default_radius: impl Fn(&Primitive) -> f64) -> Vec<SceneObject> {
        self.objects
            .iter()
            .map(|e| SceneObject {
                id: e.id.clone(),
                name: e.name.clone(),
                primitive: e.primitive,
                pose: e.pose,
                influence_radius: e.influence_radius.unwrap_or_else(|| default_radius(&e.primitive)),
                fragility: e.fragility,
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), String> {
        validate_scene(&self.objects(|_| 1.0)).map_err(|e| e.to_string())
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let doc: SceneDocument = serde_json::from_str(text).map_err(|e| e.to_string())?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes") + "\n"
    }
}

pub fn read_scene(path: &Path) -> Result<SceneDocument, InputError> {
    SceneDocument::parse(&read_text(path)?).map_err(|e| InputError::new(path, e))
}

fn is_csv(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("csv" | "txt")
    )
}

/// Parse CSV trajectory text; a first line containing letters is a header
/// and must name the columns `x,y,z,v`.
pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory, String> {
    let has_header = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .is_some_and(|l| l.chars().any(|c| c.is_ascii_alphabetic() && c != 'e' && c != 'E'));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let waypoints: Vec<Waypoint> = if has_header {
        reader.deserialize().collect::<Result<_, _>>().map_err(|e| e.to_string())?
    } else {
        reader
            .deserialize::<(f64, f64, f64, f64)>()
            .map(|r| r.map(|(x, y, z, v)| Waypoint::new(Vec3::new(x, y, z), v)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?
    };
    Trajectory::new(waypoints).map_err(|e| e.to_string())
}

/// A JSON trajectory: bare waypoint records or a trajectory document.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TrajectoryInput {
    Records(Vec<Waypoint>),
    Document(Trajectory),
}

impl TrajectoryInput {
    pub fn into_trajectory(self) -> Result<Trajectory, String> {
        match self {
            TrajectoryInput::Records(w) => Trajectory::new(w).map_err(|e| e.to_string()),
            TrajectoryInput::Document(t) => Ok(t.rebased()),
        }
    }
}

pub fn parse_trajectory_json(text: &str) -> Result<Trajectory, String> {
    serde_json::from_str::<TrajectoryInput>(text)
        .map_err(|e| e.to_string())?
        .into_trajectory()
}

/// Read a trajectory, choosing the format by extension. The result is its
/// own reference.
pub fn read_trajectory(path: &Path) -> Result<Trajectory, InputError> {
    let text = read_text(path)?;
    let parsed = if is_csv(path) {
        parse_trajectory_csv(&text)
    } else {
        parse_trajectory_json(&text)
    };
    parsed.map(|t| t.rebased()).map_err(|e| InputError::new(path, e))
}

pub fn trajectory_to_csv(trajectory: &Trajectory) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for w in trajectory.waypoints() {
        writer.serialize(w).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

/// Current waypoints as a JSON array of `{x,y,z,v}` records.
pub fn trajectory_to_json(trajectory: &Trajectory) -> String {
    serde_json::to_string_pretty(trajectory.waypoints()).expect("waypoints serialize") + "\n"
}

pub fn write_trajectory(path: &Path, trajectory: &Trajectory) -> Result<(), InputError> {
    let text = if is_csv(path) {
        trajectory_to_csv(trajectory)
    } else {
        trajectory_to_json(trajectory)
    };
    write_text(path, &text)
}

/// Extensions recognised as point-cloud files.
pub const CLOUD_EXTENSIONS: &[&str] = &["bin", "xyz", "txt", "csv", "pts"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudDescriptor {
    pub label: String,
    #[serde(alias = "shape_hint")]
    pub shape: ShapeHint,
}

pub fn parse_cloud_text(text: &str) -> Result<Vec<Vec3>, String> {
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        let values: Result<Vec<f64>, _> = fields.iter().take(3).map(|s| s.parse::<f64>()).collect();
        match values {
            Ok(v) if v.len() == 3 => points.push(Vec3::new(v[0], v[1], v[2])),
            // A leading header line is tolerated.
            Err(_) if points.is_empty() && n == 0 => continue,
            _ => return Err(format!("line {}: expected three numbers", n + 1)),
        }
    }
    Ok(points)
}

pub fn parse_cloud_bin(bytes: &[u8]) -> Result<Vec<Vec3>, String> {
    if bytes.len() % 12 != 0 {
        return Err(format!("{} bytes is not a whole number of f32 triplets", bytes.len()));
    }
    Ok(bytes
        .chunks_exact(12)
        .map(|c| {
            let f = |i: usize| f32::from_le_bytes(c[i..i + 4].try_into().expect("4 bytes")) as f64;
            Vec3::new(f(0), f(4), f(8))
        })
        .collect())
}

pub fn cloud_to_bin(points: &[Vec3]) -> Vec<u8> {
    points
        .iter()
        .flat_map(|p| p.iter().flat_map(|c| (*c as f32).to_le_bytes()).collect::<Vec<u8>>())
        .collect()
}

pub fn sidecar_path(cloud: &Path) -> PathBuf {
    cloud.with_extension("json")
}

/// Read a cloud and its sidecar descriptor.
pub fn read_cloud(path: &Path) -> Result<PointCloud, InputError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    let points = if ext == "bin" {
        let bytes = fs::read(path).map_err(|e| InputError::new(path, e))?;
        parse_cloud_bin(&bytes)
    } else {
        parse_cloud_text(&read_text(path)?)
    }
    .map_err(|e| InputError::new(path, e))?;
    let sidecar = sidecar_path(path);
    let descriptor: CloudDescriptor =
        serde_json::from_str(&read_text(&sidecar)?).map_err(|e| InputError::new(&sidecar, e))?;
    Ok(PointCloud::new(points, descriptor.label, descriptor.shape))
}

/// Cloud files directly inside `dir`, sorted by name.
pub fn list_clouds(dir: &Path) -> Result<Vec<PathBuf>, InputError> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| InputError::new(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| CLOUD_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj() -> Trajectory {
        let pts: Vec<Vec3> = (0..5).map(|i| Vec3::new(i as f64 * 0.1, 0.3, -1.0 / 3.0)).collect();
        Trajectory::from_positions(&pts, 0.7).unwrap()
    }

    #[test]
    fn trajectory_csv_and_json_round_trip_exactly() {
        let t = traj();
        assert_eq!(parse_trajectory_csv(&trajectory_to_csv(&t)).unwrap(), t);
        assert_eq!(parse_trajectory_json(&trajectory_to_json(&t)).unwrap(), t);
        assert_eq!(parse_trajectory_json(&serde_json::to_string(&t).unwrap()).unwrap(), t);
        let bare = "0,0,0,1\n1,0,0,1\n2,0,0,1\n3,0,0,1e-1\n";
        assert_eq!(parse_trajectory_csv(bare).unwrap().len(), 4);
        assert!(parse_trajectory_csv("x,y,z,v\n0,0,0,1\n").is_err());
        assert!(parse_trajectory_csv("a,b,c,d\n0,0,0,1\n1,0,0,1\n2,0,0,1\n3,0,0,1\n").is_err());
    }

    #[test]
    fn scene_document_parses_optional_fields() {
        let text = r#"{"objects":[{"id":"t","name":"table","shape":"cuboid","dimensions":{"half_extents":[0.5,0.3,0.02]},
            "pose":{"position":[0,0,0.7],"orientation":[1,0,0,0]}}]}"#;
        let doc = SceneDocument::parse(text).unwrap();
        assert_eq!(doc.objects[0].fragility, 0.5);
        assert_eq!(doc.objects[0].influence_radius, None);
        let objs = doc.objects(|_| 0.42);
        assert_eq!(objs[0].influence_radius, 0.42);
        assert_eq!(SceneDocument::parse(&doc.to_json()).unwrap(), doc);
        let bad = text.replace("0.5,0.3", "-0.5,0.3");
        assert!(SceneDocument::parse(&bad).is_err());
    }

    #[test]
    fn cloud_formats() {
        let pts = vec![Vec3::new(0.5, -1.25, 2.0), Vec3::new(1.0, 0.0, 0.25)];
        assert_eq!(parse_cloud_bin(&cloud_to_bin(&pts)).unwrap(), pts);
        assert!(parse_cloud_bin(&[0u8; 13]).is_err());
        let text = "x y z\n0.5 -1.25 2.0\n1.0,0.0,0.25\n\n# note\n";
        assert_eq!(parse_cloud_text(text).unwrap(), pts);
        assert!(parse_cloud_text("1 2 3\n1 2\n").is_err());
    }
}
