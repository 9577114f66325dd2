use nalgebra::{Isometry3, Quaternion, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use super::{GeometryError, Vec3};

/// Rigid placement of a primitive: rotation about the local origin, then
/// translation to `position`.
///
/// Serialized as `{"position": [x, y, z], "orientation": [w, x, y, z]}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoseDoc", into = "PoseDoc")]
pub struct Pose {
    pub position: Vec3,
    pub orientation: UnitQuaternion<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoseDoc {
    position: [f64; 3],
    #[serde(default = "identity_wxyz")]
    orientation: [f64; 4],
}

fn identity_wxyz() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

impl TryFrom<PoseDoc> for Pose {
    type Error = GeometryError;

    fn try_from(doc: PoseDoc) -> Result<Self, Self::Error> {
        let [w, x, y, z] = doc.orientation;
        let q = Quaternion::new(w, x, y, z);
        let norm = q.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(GeometryError::DegenerateOrientation);
        }
        Ok(Pose {
            position: Vec3::from(doc.position),
            orientation: UnitQuaternion::from_quaternion(q),
        })
    }
}

impl From<Pose> for PoseDoc {
    fn from(pose: Pose) -> Self {
        let q = pose.orientation.quaternion();
        PoseDoc {
            position: [pose.position.x, pose.position.y, pose.position.z],
            orientation: [q.w, q.i, q.j, q.k],
        }
    }
}

impl Default for Pose {
    fn default() -> Self {
        Pose::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            position: Vec3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn new(position: Vec3, orientation: UnitQuaternion<f64>) -> Self {
        Pose {
            position,
            orientation,
        }
    }

    pub fn from_translation(position: Vec3) -> Self {
        Pose::new(position, UnitQuaternion::identity())
    }

    pub fn from_isometry(iso: &Isometry3<f64>) -> Self {
        Pose::new(iso.translation.vector, iso.rotation)
    }

    pub fn to_isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.position), self.orientation)
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose::new(-(inv * self.position), inv)
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(
            self.position + self.orientation * other.position,
            self.orientation * other.orientation,
        )
    }

    pub fn transform_point(&self, local: &Vec3) -> Vec3 {
        self.orientation * local + self.position
    }

    pub fn inverse_transform_point(&self, world: &Vec3) -> Vec3 {
        self.orientation.inverse_transform_vector(&(world - self.position))
    }

    pub fn transform_vector(&self, local: &Vec3) -> Vec3 {
        self.orientation * local
    }

    pub fn inverse_transform_vector(&self, world: &Vec3) -> Vec3 {
        self.orientation.inverse_transform_vector(world)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn compose_with_inverse_is_identity() {
        let pose = Pose::new(
            Vec3::new(0.3, -1.2, 2.0),
            UnitQuaternion::from_euler_angles(0.4, -0.7, 1.9),
        );
        let id = pose.compose(&pose.inverse());
        assert_relative_eq!(id.position, Vec3::zeros(), epsilon = 1e-9);
        assert!(id.orientation.angle() < 1e-9);
        assert!((pose.orientation.quaternion().norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn serde_normalizes_and_orders_wxyz() {
        let pose: Pose =
            serde_json::from_str(r#"{"position":[1,2,3],"orientation":[2,0,0,0]}"#).unwrap();
        assert_eq!(pose.orientation, UnitQuaternion::identity());
        let text = serde_json::to_string(&pose).unwrap();
        assert_eq!(text, r#"{"position":[1.0,2.0,3.0],"orientation":[1.0,0.0,0.0,0.0]}"#);
        assert!(serde_json::from_str::<Pose>(r#"{"position":[0,0,0],"orientation":[0,0,0,0]}"#).is_err());
    }
}
