use nalgebra::Vector2;

use super::{Pose, Primitive, ProximityResult, SceneObject, Vec3};

/// Below this radial distance a query counts as lying on a symmetry axis.
const AXIS_EPS: f64 = 1e-12;

type Vec2 = Vector2<f64>;

fn to_world(pose: &Pose, local: ProximityResult) -> ProximityResult {
    ProximityResult {
        closest_point: pose.transform_point(&local.closest_point),
        signed_distance: local.signed_distance,
        outward_normal: pose.transform_vector(&local.outward_normal),
    }
}

/// Closest point on a sphere centred at the pose origin.
///
/// A query exactly at the centre resolves to the local +X surface point.
pub fn closest_point_sphere(query: &Vec3, radius: f64, pose: &Pose) -> ProximityResult {
    to_world(pose, sphere_local(&pose.inverse_transform_point(query), radius))
}

fn sphere_local(q: &Vec3, radius: f64) -> ProximityResult {
    let dist = q.norm();
    let dir = if dist > AXIS_EPS { q / dist } else { Vec3::x() };
    ProximityResult {
        closest_point: dir * radius,
        signed_distance: dist - radius,
        outward_normal: dir,
    }
}

/// Closest point on a finite two-sided rectangle in the local XY plane.
pub fn closest_point_rect_plane(
    query: &Vec3,
    half_width: f64,
    half_height: f64,
    pose: &Pose,
) -> ProximityResult {
    to_world(
        pose,
        rect_plane_local(&pose.inverse_transform_point(query), half_width, half_height),
    )
}

fn rect_plane_local(q: &Vec3, half_width: f64, half_height: f64) -> ProximityResult {
    let closest = Vec3::new(
        q.x.clamp(-half_width, half_width),
        q.y.clamp(-half_height, half_height),
        0.0,
    );
    let offset = q - closest;
    let dist = offset.norm();
    let normal = if dist > AXIS_EPS {
        offset / dist
    } else {
        Vec3::z()
    };
    ProximityResult {
        closest_point: closest,
        signed_distance: dist,
        outward_normal: normal,
    }
}

/// A closed meridian profile segment of a solid of revolution about local Z,
/// in (radial, axial) coordinates, with its outward 2-D normal.
struct ProfileSegment {
    a: Vec2,
    b: Vec2,
    normal: Vec2,
}

/// Solve a surface-of-revolution query in the meridian half-plane holding
/// the query. The nearest surface point always lies in that half-plane.
fn revolution_local(q: &Vec3, profile: &[ProfileSegment], inside: bool) -> ProximityResult {
    let rho = q.x.hypot(q.y);
    let radial = if rho > AXIS_EPS {
        Vec3::new(q.x / rho, q.y / rho, 0.0)
    } else {
        Vec3::x()
    };
    let p = Vec2::new(rho, q.z);

    let mut best: Option<(f64, Vec2, &ProfileSegment)> = None;
    for seg in profile {
        let ab = seg.b - seg.a;
        let t = ((p - seg.a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
        let c = seg.a + ab * t;
        let d = (p - c).norm();
        if best.is_none_or(|(bd, _, _)| d < bd) {
            best = Some((d, c, seg));
        }
    }
    let (dist, c, seg) = best.expect("profile is never empty");

    let n2 = if dist > AXIS_EPS {
        let n = (p - c) / dist;
        if inside {
            -n
        } else {
            n
        }
    } else {
        seg.normal
    };
    ProximityResult {
        closest_point: radial * c.x + Vec3::z() * c.y,
        signed_distance: if inside { -dist } else { dist },
        outward_normal: (radial * n2.x + Vec3::z() * n2.y).normalize(),
    }
}

/// Closest point on a closed cylinder (lateral wall plus both end discs)
/// whose axis is local Z. On-axis queries resolve radially toward local +X.
pub fn closest_point_cylinder(
    query: &Vec3,
    radius: f64,
    half_length: f64,
    pose: &Pose,
) -> ProximityResult {
    to_world(
        pose,
        cylinder_local(&pose.inverse_transform_point(query), radius, half_length),
    )
}

fn cylinder_local(q: &Vec3, radius: f64, half_length: f64) -> ProximityResult {
    let (r, h) = (radius, half_length);
    let profile = [
        ProfileSegment {
            a: Vec2::new(0.0, h),
            b: Vec2::new(r, h),
            normal: Vec2::new(0.0, 1.0),
        },
        ProfileSegment {
            a: Vec2::new(r, h),
            b: Vec2::new(r, -h),
            normal: Vec2::new(1.0, 0.0),
        },
        ProfileSegment {
            a: Vec2::new(r, -h),
            b: Vec2::new(0.0, -h),
            normal: Vec2::new(0.0, -1.0),
        },
    ];
    let inside = q.x.hypot(q.y) < r && q.z.abs() < h;
    revolution_local(q, &profile, inside)
}

/// Closest point on a closed cone: base disc at local Z = 0 and apex at
/// local Z = `height`. On-axis queries resolve radially toward local +X.
pub fn closest_point_cone(
    query: &Vec3,
    base_radius: f64,
    height: f64,
    pose: &Pose,
) -> ProximityResult {
    to_world(
        pose,
        cone_local(&pose.inverse_transform_point(query), base_radius, height),
    )
}

fn cone_local(q: &Vec3, base_radius: f64, height: f64) -> ProximityResult {
    let (r, h) = (base_radius, height);
    let profile = [
        ProfileSegment {
            a: Vec2::new(0.0, 0.0),
            b: Vec2::new(r, 0.0),
            normal: Vec2::new(0.0, -1.0),
        },
        ProfileSegment {
            a: Vec2::new(r, 0.0),
            b: Vec2::new(0.0, h),
            normal: Vec2::new(h, r).normalize(),
        },
    ];
    let rho = q.x.hypot(q.y);
    let inside = q.z > 0.0 && q.z < h && rho < r * (1.0 - q.z / h);
    revolution_local(q, &profile, inside)
}

/// Closest point on an axis-aligned box centred on the pose origin.
///
/// Exterior queries clamp into the box, which agrees with the nearest of the
/// six face planes wherever that choice is unambiguous and stays exact at
/// edges and corners. Interior queries snap to the nearest face; ties go to
/// the lowest axis and the positive face.
pub fn closest_point_cuboid(query: &Vec3, half_extents: &Vec3, pose: &Pose) -> ProximityResult {
    to_world(
        pose,
        cuboid_local(&pose.inverse_transform_point(query), half_extents),
    )
}

fn cuboid_local(q: &Vec3, half: &Vec3) -> ProximityResult {
    let outside = (0..3).any(|i| q[i].abs() > half[i]);
    if outside {
        let closest = Vec3::new(
            q.x.clamp(-half.x, half.x),
            q.y.clamp(-half.y, half.y),
            q.z.clamp(-half.z, half.z),
        );
        let offset = q - closest;
        let dist = offset.norm();
        return ProximityResult {
            closest_point: closest,
            signed_distance: dist,
            outward_normal: offset / dist,
        };
    }

    let mut axis = 0;
    let mut gap = half[0] - q[0].abs();
    for i in 1..3 {
        let g = half[i] - q[i].abs();
        if g < gap {
            gap = g;
            axis = i;
        }
    }
    let side = if q[axis] >= 0.0 { 1.0 } else { -1.0 };
    let mut closest = *q;
    closest[axis] = side * half[axis];
    let mut normal = Vec3::zeros();
    normal[axis] = side;
    ProximityResult {
        closest_point: closest,
        signed_distance: -gap,
        outward_normal: normal,
    }
}

/// Proximity of a world-frame query to a posed scene object.
pub fn closest_point(query: &Vec3, object: &SceneObject) -> ProximityResult {
    let pose = &object.pose;
    let local = pose.inverse_transform_point(query);
    let result = match object.primitive {
        Primitive::Sphere { radius } => sphere_local(&local, radius),
        Primitive::RectPlane {
            half_width,
            half_height,
        } => rect_plane_local(&local, half_width, half_height),
        Primitive::Cylinder {
            radius,
            half_length,
        } => cylinder_local(&local, radius, half_length),
        Primitive::Cone {
            base_radius,
            height,
        } => cone_local(&local, base_radius, height),
        Primitive::Cuboid { half_extents } => cuboid_local(&local, &half_extents),
    };
    to_world(pose, result)
}

/// Proximity results for every trajectory point within the object's
/// influence radius, keyed by point index. Points farther away are omitted.
pub fn batch_proximity(points: &[Vec3], object: &SceneObject) -> Vec<(usize, ProximityResult)> {
    points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| {
            let r = closest_point(p, object);
            (r.signed_distance <= object.influence_radius).then_some((i, r))
        })
        .collect()
}
