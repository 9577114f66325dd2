use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Pose, Primitive, Vec3};

/// `count` points spread uniformly by area over the surface of a posed
/// primitive, reproducible from `seed`.
pub fn sample_surface(primitive: &Primitive, pose: &Pose, count: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| pose.transform_point(&sample_local(primitive, &mut rng)))
        .collect()
}

fn unit_disc(rng: &mut impl Rng, radius: f64) -> (f64, f64) {
    let r = radius * rng.random::<f64>().sqrt();
    let a = rng.random_range(0.0..2.0 * PI);
    (r * a.cos(), r * a.sin())
}

fn sample_local(primitive: &Primitive, rng: &mut impl Rng) -> Vec3 {
    match *primitive {
        Primitive::Sphere { radius } => {
            let z: f64 = rng.random_range(-1.0..=1.0);
            let a = rng.random_range(0.0..2.0 * PI);
            let s = (1.0 - z * z).sqrt();
            Vec3::new(s * a.cos(), s * a.sin(), z) * radius
        }
        Primitive::RectPlane { half_width, half_height } => Vec3::new(
            rng.random_range(-half_width..=half_width),
            rng.random_range(-half_height..=half_height),
            0.0,
        ),
        Primitive::Cylinder { radius, half_length } => {
            let side = 2.0 * PI * radius * 2.0 * half_length;
            let cap = PI * radius * radius;
            let pick = rng.random_range(0.0..side + 2.0 * cap);
            if pick < side {
                let a = rng.random_range(0.0..2.0 * PI);
                Vec3::new(radius * a.cos(), radius * a.sin(), rng.random_range(-half_length..=half_length))
            } else {
                let (x, y) = unit_disc(rng, radius);
                let z = if pick < side + cap { half_length } else { -half_length };
                Vec3::new(x, y, z)
            }
        }
        Primitive::Cone { base_radius, height } => {
            let slant = (base_radius * base_radius + height * height).sqrt();
            let lateral = PI * base_radius * slant;
            let base = PI * base_radius * base_radius;
            if rng.random_range(0.0..lateral + base) < lateral {
                // Fraction of the way from apex to base; area grows linearly.
                let t = rng.random::<f64>().sqrt();
                let a = rng.random_range(0.0..2.0 * PI);
                Vec3::new(base_radius * t * a.cos(), base_radius * t * a.sin(), height * (1.0 - t))
            } else {
                let (x, y) = unit_disc(rng, base_radius);
                Vec3::new(x, y, 0.0)
            }
        }
        Primitive::Cuboid { half_extents: h } => {
            let areas = [h.y * h.z, h.x * h.z, h.x * h.y];
            let total: f64 = areas.iter().sum::<f64>() * 2.0;
            let mut pick = rng.random_range(0.0..total);
            let mut axis = 0;
            while axis < 2 && pick >= areas[axis] * 2.0 {
                pick -= areas[axis] * 2.0;
                axis += 1;
            }
            let mut p = Vec3::new(
                rng.random_range(-h.x..=h.x),
                rng.random_range(-h.y..=h.y),
                rng.random_range(-h.z..=h.z),
            );
            p[axis] = if rng.random::<bool>() { h[axis] } else { -h[axis] };
            p
        }
    }
}
