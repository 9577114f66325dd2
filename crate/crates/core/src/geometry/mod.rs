//! Posed geometric primitives and exact closest-point queries.
//!
//! Every query works in the primitive's local frame and is mapped back to
//! the world frame through the object's [`Pose`]. Signed distances are
//! negative strictly inside a solid and zero on its surface; a rectangular
//! plane has no interior, so its distance is never negative.

mod closest;
mod pose;

pub use closest::{
    batch_proximity, closest_point, closest_point_cone, closest_point_cuboid,
    closest_point_cylinder, closest_point_rect_plane, closest_point_sphere,
};
pub use pose::Pose;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point or direction in 3-D workspace coordinates.
pub type Vec3 = Vector3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("primitive dimension `{field}` must be finite and > 0, got {value}")]
    NonPositiveDimension { field: &'static str, value: f64 },
    #[error("object `{id}`: influence_radius must be > 0, got {value}")]
    InfluenceRadius { id: String, value: f64 },
    #[error("object `{id}`: fragility must lie in [0, 1], got {value}")]
    Fragility { id: String, value: f64 },
    #[error("duplicate object id `{0}`")]
    DuplicateId(String),
    #[error("orientation must be a non-zero quaternion")]
    DegenerateOrientation,
}

/// One of the five canonical shapes, expressed in its local frame.
///
/// * `Sphere` is centred on the origin.
/// * `RectPlane` lies in the local XY plane, centred on the origin.
/// * `Cylinder` has its axis along local Z, centred on the origin.
/// * `Cone` has its base disc at local Z = 0 and its apex at Z = `height`.
/// * `Cuboid` is centred on the origin and axis aligned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", content = "dimensions", rename_all = "lowercase")]
pub enum Primitive {
    Sphere { radius: f64 },
    #[serde(rename = "plane")]
    RectPlane { half_width: f64, half_height: f64 },
    Cylinder { radius: f64, half_length: f64 },
    Cone { base_radius: f64, height: f64 },
    Cuboid { half_extents: Vec3 },
}

impl Primitive {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let check = |field: &'static str, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(GeometryError::NonPositiveDimension { field, value })
            }
        };
        match *self {
            Primitive::Sphere { radius } => check("radius", radius),
            Primitive::RectPlane {
                half_width,
                half_height,
            } => {
                check("half_width", half_width)?;
                check("half_height", half_height)
            }
            Primitive::Cylinder {
                radius,
                half_length,
            } => {
                check("radius", radius)?;
                check("half_length", half_length)
            }
            Primitive::Cone {
                base_radius,
                height,
            } => {
                check("base_radius", base_radius)?;
                check("height", height)
            }
            Primitive::Cuboid { half_extents } => {
                check("half_extents.x", half_extents.x)?;
                check("half_extents.y", half_extents.y)?;
                check("half_extents.z", half_extents.z)
            }
        }
    }

    /// Largest full dimension (diameter, edge length, height).
    pub fn largest_dimension(&self) -> f64 {
        match *self {
            Primitive::Sphere { radius } => 2.0 * radius,
            Primitive::RectPlane {
                half_width,
                half_height,
            } => 2.0 * half_width.max(half_height),
            Primitive::Cylinder {
                radius,
                half_length,
            } => 2.0 * radius.max(half_length),
            Primitive::Cone {
                base_radius,
                height,
            } => (2.0 * base_radius).max(height),
            Primitive::Cuboid { half_extents } => 2.0 * half_extents.max(),
        }
    }

    /// Radius of the smallest origin-centred ball containing the shape.
    pub fn bounding_radius(&self) -> f64 {
        match *self {
            Primitive::Sphere { radius } => radius,
            Primitive::RectPlane {
                half_width,
                half_height,
            } => half_width.hypot(half_height),
            Primitive::Cylinder {
                radius,
                half_length,
            } => radius.hypot(half_length),
            Primitive::Cone {
                base_radius,
                height,
            } => base_radius.max(height),
            Primitive::Cuboid { half_extents } => half_extents.norm(),
        }
    }

    /// Centre of the local axis-aligned bounding box.
    pub fn local_center(&self) -> Vec3 {
        match *self {
            Primitive::Cone { height, .. } => Vec3::new(0.0, 0.0, 0.5 * height),
            _ => Vec3::zeros(),
        }
    }

    /// Multiply every dimension by `factor`.
    pub fn scaled(&self, factor: f64) -> Primitive {
        match *self {
            Primitive::Sphere { radius } => Primitive::Sphere {
                radius: radius * factor,
            },
            Primitive::RectPlane {
                half_width,
                half_height,
            } => Primitive::RectPlane {
                half_width: half_width * factor,
                half_height: half_height * factor,
            },
            Primitive::Cylinder {
                radius,
                half_length,
            } => Primitive::Cylinder {
                radius: radius * factor,
                half_length: half_length * factor,
            },
            Primitive::Cone {
                base_radius,
                height,
            } => Primitive::Cone {
                base_radius: base_radius * factor,
                height: height * factor,
            },
            Primitive::Cuboid { half_extents } => Primitive::Cuboid {
                half_extents: half_extents * factor,
            },
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Primitive::Sphere { .. } => "sphere",
            Primitive::RectPlane { .. } => "plane",
            Primitive::Cylinder { .. } => "cylinder",
            Primitive::Cone { .. } => "cone",
            Primitive::Cuboid { .. } => "cuboid",
        }
    }
}

/// Default range of an object's potential field in normalized units:
/// `max(0.3, 1.5 * largest dimension)`.
pub fn default_influence_radius(primitive: &Primitive) -> f64 {
    (1.5 * primitive.largest_dimension()).max(0.3)
}

fn default_fragility() -> f64 {
    0.5
}

/// A named, posed primitive in the scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub id: String,
    pub name: String,
    #[serde(flatten)]
    pub primitive: Primitive,
    pub pose: Pose,
    pub influence_radius: f64,
    #[serde(default = "default_fragility")]
    pub fragility: f64,
}

impl SceneObject {
    /// Build an object with the default influence radius and fragility.
    pub fn new(id: impl Into<String>, name: impl Into<String>, primitive: Primitive, pose: Pose) -> Self {
        SceneObject {
            id: id.into(),
            name: name.into(),
            influence_radius: default_influence_radius(&primitive),
            primitive,
            pose,
            fragility: default_fragility(),
        }
    }

    pub fn with_influence_radius(mut self, radius: f64) -> Self {
        self.influence_radius = radius;
        self
    }

    pub fn with_fragility(mut self, fragility: f64) -> Self {
        self.fragility = fragility;
        self
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        self.primitive.validate()?;
        if !(self.influence_radius.is_finite() && self.influence_radius > 0.0) {
            return Err(GeometryError::InfluenceRadius {
                id: self.id.clone(),
                value: self.influence_radius,
            });
        }
        if !(0.0..=1.0).contains(&self.fragility) {
            return Err(GeometryError::Fragility {
                id: self.id.clone(),
                value: self.fragility,
            });
        }
        Ok(())
    }

    /// World-frame centre of the object's bounding box.
    pub fn center(&self) -> Vec3 {
        self.pose.transform_point(&self.primitive.local_center())
    }

    pub fn proximity(&self, query: &Vec3) -> ProximityResult {
        closest_point(query, self)
    }
}

/// Check primitive validity and id uniqueness over a whole scene.
pub fn validate_scene(objects: &[SceneObject]) -> Result<(), GeometryError> {
    let mut seen = std::collections::BTreeSet::new();
    for object in objects {
        object.validate()?;
        if !seen.insert(object.id.as_str()) {
            return Err(GeometryError::DuplicateId(object.id.clone()));
        }
    }
    Ok(())
}

/// Closest surface point, signed distance and outward normal for one query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProximityResult {
    pub closest_point: Vec3,
    pub signed_distance: f64,
    pub outward_normal: Vec3,
}
