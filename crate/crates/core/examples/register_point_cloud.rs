//! Fit primitives to noisy synthetic clouds: outlier removal, DBSCAN,
//! oriented bounding box, then the hinted primitive.

use nalgebra::UnitQuaternion;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajshape::geometry::{Pose, Primitive, Vec3};
use trajshape::registration::{register_cloud, sample_surface, PointCloud, RegistrationParams, ShapeHint};

fn noisy(primitive: Primitive, pose: Pose, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = sample_surface(&primitive, &pose, 4000, seed);
    for p in &mut pts {
        *p += Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * 0.002;
    }
    // Sparse clutter far from the object.
    for _ in 0..40 {
        pts.push(Vec3::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(2.0..3.0)));
    }
    pts
}

fn main() {
    let params = RegistrationParams::default();
    let fixtures = [
        ("mug", ShapeHint::Cylinder, Primitive::Cylinder { radius: 0.12, half_length: 0.2 }),
        ("orange", ShapeHint::Sphere, Primitive::Sphere { radius: 0.15 }),
        ("box", ShapeHint::Cuboid, Primitive::Cuboid { half_extents: Vec3::new(0.3, 0.2, 0.1) }),
    ];
    for (i, (label, hint, truth)) in fixtures.into_iter().enumerate() {
        let pose = Pose::new(Vec3::new(i as f64, 0.5, 0.8), UnitQuaternion::from_euler_angles(0.4, 0.1, -0.7));
        let cloud = PointCloud::new(noisy(truth, pose, i as u64), label, hint);
        match register_cloud(&cloud, &params) {
            Ok(o) => println!("{label:>7}: truth {truth:?}\n         fit   {:?} at {:.3?}", o.primitive, o.pose.position.as_slice()),
            Err(e) => println!("{label:>7}: {e}"),
        }
    }
}
