//! From a labelled object point cloud to a posed primitive: statistical
//! outlier removal, DBSCAN clustering, a principal-axes bounding box and a
//! shape-specific fit.

mod cluster;
mod obb;
mod synthetic;

pub use cluster::{dbscan_cluster, remove_statistical_outliers};
pub use obb::{fit_obb, fit_primitive, OrientedBox};
pub use synthetic::sample_surface;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{SceneObject, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegistrationError {
    #[error("insufficient data: {got} points, need more than {need}")]
    InsufficientPoints { got: usize, need: usize },
    #[error("no object cluster found")]
    NoCluster,
    #[error("degenerate cloud")]
    DegenerateCloud,
    #[error("point {0} is not finite")]
    NonFinite(usize),
    #[error("invalid parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Shape class of a cloud, supplied alongside it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeHint {
    Sphere,
    Cylinder,
    Cone,
    Cuboid,
}

impl ShapeHint {
    pub const ALL: [ShapeHint; 4] = [ShapeHint::Sphere, ShapeHint::Cylinder, ShapeHint::Cone, ShapeHint::Cuboid];
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub label: String,
    pub shape_hint: ShapeHint,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>, label: impl Into<String>, shape_hint: ShapeHint) -> Self {
        PointCloud {
            points,
            label: label.into(),
            shape_hint,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn with_points(&self, points: Vec<Vec3>) -> PointCloud {
        PointCloud {
            points,
            label: self.label.clone(),
            shape_hint: self.shape_hint,
        }
    }

    fn check_finite(&self) -> Result<(), RegistrationError> {
        match self.points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            Some(i) => Err(RegistrationError::NonFinite(i)),
            None => Ok(()),
        }
    }
}

fn default_neighbors() -> usize {
    20
}
fn default_std_ratio() -> f64 {
    1.0
}
fn default_eps() -> f64 {
    0.15
}
fn default_min_points() -> usize {
    15
}

/// Cleaning and clustering parameters, in the cloud's length unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegistrationParams {
    #[serde(default = "default_neighbors")]
    pub neighbors: usize,
    #[serde(default = "default_std_ratio")]
    pub std_ratio: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_min_points")]
    pub min_points: usize,
}

impl Default for RegistrationParams {
    fn default() -> Self {
        RegistrationParams {
            neighbors: default_neighbors(),
            std_ratio: default_std_ratio(),
            eps: default_eps(),
            min_points: default_min_points(),
        }
    }
}

/// Turn a label into an object id: lowercase ASCII alphanumerics, anything
/// else collapsed to `_`.
pub fn object_id_from_label(label: &str) -> String {
    let mut id = String::new();
    for c in label.trim().chars() {
        if c.is_ascii_alphanumeric() {
            id.push(c.to_ascii_lowercase());
        } else if !id.ends_with('_') {
            id.push('_');
        }
    }
    let id = id.trim_matches('_').to_string();
    if id.is_empty() {
        "object".to_string()
    } else {
        id
    }
}

/// Full pipeline for one cloud. The largest cluster is taken as the object.
pub fn register_cloud(cloud: &PointCloud, params: &RegistrationParams) -> Result<SceneObject, RegistrationError> {
    let cleaned = remove_statistical_outliers(cloud, params.neighbors, params.std_ratio)?;
    let clusters = dbscan_cluster(&cleaned, params.eps, params.min_points)?;
    let object = &clusters[0];
    let obb = fit_obb(object)?;
    Ok(fit_primitive(cloud.shape_hint, &obb, object))
}
