//! Closest point, signed distance and outward normal for each primitive.

use nalgebra::UnitQuaternion;
use trajshape::geometry::{closest_point, Pose, Primitive, SceneObject, Vec3};

fn main() {
    let tilt = UnitQuaternion::from_euler_angles(0.3, -0.2, 0.5);
    let objects = [
        SceneObject::new("ball", "ball", Primitive::Sphere { radius: 0.2 }, Pose::identity()),
        SceneObject::new(
            "tray",
            "tray",
            Primitive::RectPlane {
                half_width: 0.4,
                half_height: 0.25,
            },
            Pose::new(Vec3::new(0.0, 0.0, -0.3), tilt),
        ),
        SceneObject::new(
            "can",
            "can",
            Primitive::Cylinder {
                radius: 0.1,
                half_length: 0.3,
            },
            Pose::new(Vec3::new(0.5, 0.0, 0.0), tilt),
        ),
        SceneObject::new(
            "funnel",
            "funnel",
            Primitive::Cone {
                base_radius: 0.2,
                height: 0.4,
            },
            Pose::from_translation(Vec3::new(-0.5, 0.2, 0.0)),
        ),
        SceneObject::new(
            "table",
            "table",
            Primitive::Cuboid {
                half_extents: Vec3::new(0.6, 0.4, 0.02),
            },
            Pose::from_translation(Vec3::new(0.0, 0.0, -0.6)),
        ),
    ];
    let queries = [Vec3::new(0.3, 0.1, 0.2), Vec3::new(0.05, 0.0, 0.0), Vec3::new(-0.4, 0.3, 0.5)];
    for o in &objects {
        println!("{} ({})", o.name, o.primitive.kind_name());
        for q in &queries {
            let r = closest_point(q, o);
            println!(
                "  query {:>6.3?}  d = {:>7.4}  closest {:>6.3?}  normal {:>6.3?}",
                q.as_slice(),
                r.signed_distance,
                r.closest_point.as_slice(),
                r.outward_normal.as_slice()
            );
        }
    }
}
