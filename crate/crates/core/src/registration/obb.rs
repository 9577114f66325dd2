use nalgebra::{Matrix3, Rotation3, SymmetricEigen, UnitQuaternion};
use serde::{Deserialize, Serialize};

use super::{object_id_from_label, PointCloud, RegistrationError, ShapeHint};
use crate::geometry::{Pose, Primitive, SceneObject, Vec3};

/// Box in the cloud's principal axes. Local X, Y and Z are the axes of
/// largest, middle and smallest variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub pose: Pose,
    pub half_extents: Vec3,
}

impl OrientedBox {
    /// World-frame unit axis `i` of the box.
    pub fn axis(&self, i: usize) -> Vec3 {
        self.pose.transform_vector(&Vec3::ith(i, 1.0))
    }

    pub fn contains(&self, p: &Vec3, tolerance: f64) -> bool {
        let local = self.pose.inverse_transform_point(p);
        (0..3).all(|i| local[i].abs() <= self.half_extents[i] + tolerance)
    }
}

/// Flip `v` so its first component that is clearly non-zero, in X, Y, Z
/// order, is positive.
fn canonical_sign(v: Vec3) -> Vec3 {
    for c in v.iter() {
        if c.abs() > 1e-9 {
            return if *c < 0.0 { -v } else { v };
        }
    }
    v
}

/// Principal-axes bounding box from the point covariance.
///
/// Axes are ordered by descending eigenvalue; the first two get a canonical
/// sign and the third is their cross product, so the frame is always
/// right-handed. Extents cover the min/max projections and the centre sits
/// at their midpoint.
pub fn fit_obb(cloud: &PointCloud) -> Result<OrientedBox, RegistrationError> {
    cloud.check_finite()?;
    let n = cloud.len();
    if n < 4 {
        return Err(RegistrationError::DegenerateCloud);
    }
    let mean = cloud.points.iter().sum::<Vec3>() / n as f64;
    let mut cov = Matrix3::zeros();
    for p in &cloud.points {
        let d = p - mean;
        cov += d * d.transpose();
    }
    cov /= n as f64;

    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let largest = eig.eigenvalues[order[0]];
    if !(largest > 0.0) || eig.eigenvalues[order[2]] <= largest * 1e-10 {
        return Err(RegistrationError::DegenerateCloud);
    }
    let e1 = canonical_sign(eig.eigenvectors.column(order[0]).into_owned());
    let e2 = canonical_sign(eig.eigenvectors.column(order[1]).into_owned());
    let e3 = e1.cross(&e2).normalize();
    let axes = [e1, e2, e3];

    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in &cloud.points {
        for i in 0..3 {
            let t = (p - mean).dot(&axes[i]);
            lo[i] = lo[i].min(t);
            hi[i] = hi[i].max(t);
        }
    }
    let mid = (lo + hi) / 2.0;
    let half_extents = (hi - lo) / 2.0;
    if half_extents.iter().any(|h| !(*h > 0.0)) {
        return Err(RegistrationError::DegenerateCloud);
    }
    let center = mean + e1 * mid[0] + e2 * mid[1] + e3 * mid[2];
    let rotation = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&axes));
    Ok(OrientedBox {
        pose: Pose::new(center, UnitQuaternion::from_rotation_matrix(&rotation)),
        half_extents,
    })
}

fn frame(x: Vec3, y: Vec3, z: Vec3) -> UnitQuaternion<f64> {
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z])))
}

/// Map a bounding box onto the primitive named by `hint`.
///
/// * sphere: radius is the mean half extent, centred on the box;
/// * cuboid: the box itself;
/// * cylinder: axis along the longest box axis, radius the mean of the two
///   shorter half extents;
/// * cone: axis along the longest box axis, height its full extent, base
///   radius as for the cylinder, base at the end whose outer quarter holds
///   more points.
pub fn fit_primitive(hint: ShapeHint, obb: &OrientedBox, cloud: &PointCloud) -> SceneObject {
    let h = obb.half_extents;
    let [e1, e2, e3] = [obb.axis(0), obb.axis(1), obb.axis(2)];
    let center = obb.pose.position;
    let (primitive, pose) = match hint {
        ShapeHint::Sphere => (
            Primitive::Sphere { radius: (h.x + h.y + h.z) / 3.0 },
            Pose::new(center, UnitQuaternion::identity()),
        ),
        ShapeHint::Cuboid => (Primitive::Cuboid { half_extents: h }, obb.pose),
        ShapeHint::Cylinder => (
            Primitive::Cylinder {
                radius: (h.y + h.z) / 2.0,
                half_length: h.x,
            },
            Pose::new(center, frame(e2, e3, e1)),
        ),
        ShapeHint::Cone => {
            let (mut low, mut high) = (0usize, 0usize);
            for p in &cloud.points {
                let t = (p - center).dot(&e1);
                if t <= -h.x / 2.0 {
                    low += 1;
                } else if t >= h.x / 2.0 {
                    high += 1;
                }
            }
            let primitive = Primitive::Cone {
                base_radius: (h.y + h.z) / 2.0,
                height: 2.0 * h.x,
            };
            let pose = if low >= high {
                Pose::new(center - e1 * h.x, frame(e2, e3, e1))
            } else {
                Pose::new(center + e1 * h.x, frame(e2, -e3, -e1))
            };
            (primitive, pose)
        }
    };
    SceneObject::new(object_id_from_label(&cloud.label), cloud.label.clone(), primitive, pose)
}
