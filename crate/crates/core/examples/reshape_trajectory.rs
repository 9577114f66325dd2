//! Reshape one trajectory from a typed command: normalize, interpret with
//! the template grammar, run the agents, map back to workspace units.

use trajshape::config::Config;
use trajshape::geometry::{Pose, Primitive, SceneObject, Vec3};
use trajshape::io::SceneDocument;
use trajshape::pipeline::{cmd_reshape, CommandSource};
use trajshape::trajectory::Trajectory;

fn main() {
    // A straight pass over a table, in metres.
    let path: Vec<Vec3> = (0..50).map(|i| Vec3::new(-0.6 + 1.2 * i as f64 / 49.0, 0.0, 0.35)).collect();
    let trajectory = Trajectory::from_positions(&path, 0.25).unwrap();
    let table = SceneObject::new(
        "table",
        "table",
        Primitive::Cuboid {
            half_extents: Vec3::new(0.4, 0.3, 0.02),
        },
        Pose::from_translation(Vec3::new(0.0, 0.0, 0.0)),
    );
    let glass = SceneObject::new(
        "glass",
        "glass",
        Primitive::Cylinder {
            radius: 0.04,
            half_length: 0.08,
        },
        Pose::from_translation(Vec3::new(0.1, 0.05, 0.1)),
    );
    let scene = SceneDocument::from_objects(&[table, glass], false);
    let command = "go slower near the table and move away from the glass";
    let out = cmd_reshape(
        &scene,
        &trajectory,
        &CommandSource::Text(command.into()),
        &Config::default(),
        None,
    )
    .unwrap();
    println!("{command:?}: success = {}, best agent = {}", out.report.success, out.report.best.agent.name());
    for o in &out.report.best.outcomes {
        println!("  {:<8} {:?} measured {:.4} threshold {:.3} passed {}", o.constraint_id, o.kind, o.measured, o.threshold, o.passed);
    }
    for (a, b) in trajectory.waypoints().iter().zip(out.trajectory.waypoints()).step_by(7) {
        println!(
            "  ({:>6.3}, {:>6.3}, {:>6.3}) v {:.3}  ->  ({:>6.3}, {:>6.3}, {:>6.3}) v {:.3}",
            a.position.x, a.position.y, a.position.z, a.speed, b.position.x, b.position.y, b.position.z, b.speed
        );
    }
}
