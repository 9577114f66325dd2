use super::*;
use crate::constraint::Sign;
use crate::geometry::{Pose, Primitive};
use approx::assert_relative_eq;
use proptest::prelude::*;

fn line(n: usize) -> Vec<Vec3> {
    (0..n).map(|i| Vec3::new(i as f64 * 0.1, 0.0, 0.0)).collect()
}

fn arc(n: usize) -> Vec<Vec3> {
    (0..n)
        .map(|i| {
            let t = std::f64::consts::PI * i as f64 / (n - 1) as f64;
            Vec3::new(-t.cos() * 0.8, t.sin() * 0.8, 0.1)
        })
        .collect()
}

fn sphere(id: &str, center: Vec3, radius: f64) -> SceneObject {
    SceneObject::new(id, id, Primitive::Sphere { radius }, Pose::from_translation(center))
}

#[test]
fn spring_rest_state_and_translation_are_force_free() {
    let pts = arc(12);
    for f in spring_forces(&pts, &pts, 1.0).unwrap() {
        assert_eq!(f, Vec3::zeros());
    }
    let moved: Vec<Vec3> = pts.iter().map(|p| p + Vec3::new(0.3, -0.2, 0.7)).collect();
    for f in spring_forces(&moved, &pts, 1.0).unwrap() {
        assert!(f.norm() < 1e-12);
    }
}

#[test]
fn stretched_segment_pulls_its_ends_together() {
    // Rest length 0.1; stretch segment 2-3 to 0.2 by shifting 3.. along +X.
    let original = line(6);
    let mut current = original.clone();
    for p in current.iter_mut().skip(3) {
        p.x += 0.1;
    }
    let k = 1.7;
    let f = spring_forces(&current, &original, k).unwrap();
    assert_relative_eq!(f[2], Vec3::new(k * 0.1, 0.0, 0.0), epsilon = 1e-12);
    assert_relative_eq!(f[3], Vec3::new(-k * 0.1, 0.0, 0.0), epsilon = 1e-12);
    for j in [0, 1, 4, 5] {
        assert!(f[j].norm() < 1e-12);
    }

    // Doubling the stretch doubles the force exactly.
    for p in current.iter_mut().skip(3) {
        p.x += 0.1;
    }
    let f2 = spring_forces(&current, &original, k).unwrap();
    assert_relative_eq!(f2[2].norm(), 2.0 * f[2].norm(), max_relative = 1e-12);
}

#[test]
fn spring_rejects_coincident_waypoints() {
    let original = line(5);
    let mut current = original.clone();
    current[2] = current[1];
    assert_eq!(
        spring_forces(&current, &original, 1.0),
        Err(OptimizeError::CoincidentWaypoints(1))
    );
}

#[test]
fn curvature_straightens_a_bend() {
    let original = line(5);
    assert!(curvature_forces(&original, &original, 0.5).iter().all(|f| *f == Vec3::zeros()));
    let curved = arc(9);
    assert!(curvature_forces(&curved, &curved, 0.5).iter().all(|f| f.norm() < 1e-12));

    let mut bent = original.clone();
    bent[2].y = 0.1;
    let f = curvature_forces(&bent, &original, 0.5);
    // c_1 = ((w3 - w2) - (w2 - w1)) / 2 = (0, -0.1, 0); |c0| = 0.
    assert_relative_eq!(f[2], Vec3::new(0.0, -0.05, 0.0), epsilon = 1e-12);
    // c_0 and c_2 point away from the bend and act on waypoints 1 and 3.
    assert!(f[1].y > 0.0 && f[3].y > 0.0);
    assert_eq!(f[0], Vec3::zeros());
    assert_eq!(f[4], Vec3::zeros());
}

#[test]
fn self_adherence_is_restorative_and_linear() {
    let original = vec![Vec3::zeros(); 3];
    let mut current = original.clone();
    current[1] = Vec3::new(0.1, 0.0, 0.0);
    let f = self_adherence_force(&current, &original, 0.1);
    assert_relative_eq!(f[1], Vec3::new(-0.01, 0.0, 0.0), epsilon = 1e-15);
    let f2 = self_adherence_force(&current, &original, 0.2);
    assert_relative_eq!(f2[1], f[1] * 2.0, epsilon = 1e-15);
    assert_eq!(f[0], Vec3::zeros());
}

#[test]
fn external_force_examples() {
    let params = OptimizerParams::default();
    let obj = sphere("s", Vec3::zeros(), 0.2).with_influence_radius(0.4);
    let scene = vec![obj.clone()];

    // Outside every range, no fields.
    let far = Vec3::new(2.0, 0.0, 0.0);
    assert_eq!(external_force(&far, &far, &[], &scene, &params), Vec3::zeros());

    // Closer at d = rho / 2: magnitude 0.5, toward the closest point.
    let closer = PotentialField::new(Constraint::distance(Sign::Minus, "s"), &scene).unwrap();
    let p = Vec3::new(0.4, 0.0, 0.0);
    let g = external_force(&p, &p, std::slice::from_ref(&closer), &scene, &params);
    assert_relative_eq!(g, Vec3::new(-0.5, 0.0, 0.0), epsilon = 1e-12);

    // Farther: same magnitude, outward.
    let farther = PotentialField::new(Constraint::distance(Sign::Plus, "s"), &scene).unwrap();
    let g = external_force(&p, &p, &[farther], &scene, &params);
    assert_relative_eq!(g, Vec3::new(0.5, 0.0, 0.0), epsilon = 1e-12);

    // Inside the solid: full obstacle gain along the outward normal.
    let inside = Vec3::new(0.0, 0.0, 0.1);
    let g = external_force(&inside, &inside, &[], &scene, &params);
    assert_relative_eq!(g, Vec3::new(0.0, 0.0, params.w_ext * params.obstacle_gain), epsilon = 1e-12);

    // Attraction is off at the standoff.
    let at_standoff = Vec3::new(0.2 + params.obstacle_range, 0.0, 0.0);
    let g = external_force(&at_standoff, &at_standoff, &[closer], &scene, &params);
    assert!(g.norm() < 1e-12, "{g:?}");

    // w_ext scales everything.
    let doubled = OptimizerParams { w_ext: 2.0, ..params };
    let g = external_force(&inside, &inside, &[], &scene, &doubled);
    assert_relative_eq!(g.norm(), 2.0 * params.obstacle_gain, epsilon = 1e-12);
}

#[test]
fn cartesian_fields_global_and_local() {
    let params = OptimizerParams::default();
    let obj = sphere("s", Vec3::zeros(), 0.1).with_influence_radius(0.3);
    let scene = vec![obj];
    let global = PotentialField::new(Constraint::cartesian(Vec3::x()).with_intensity(0.5), &scene).unwrap();
    let far = Vec3::new(5.0, 5.0, 5.0);
    assert_relative_eq!(external_force(&far, &far, std::slice::from_ref(&global), &scene, &params), Vec3::new(0.5, 0.0, 0.0));

    let local = PotentialField::new(Constraint::cartesian(Vec3::z()).with_target("s"), &scene).unwrap();
    assert_eq!(external_force(&far, &far, std::slice::from_ref(&local), &scene, &params), Vec3::zeros());
    let near = Vec3::new(0.3, 0.0, 0.0);
    assert_relative_eq!(external_force(&near, &near, std::slice::from_ref(&local), &scene, &params), Vec3::z());
    // Membership follows the reference position, not the current one.
    assert_relative_eq!(external_force(&far, &near, std::slice::from_ref(&local), &scene, &params), Vec3::z());
    assert_eq!(external_force(&near, &far, &[local], &scene, &params), Vec3::zeros());
}

#[test]
fn rest_state_converges_without_moving() {
    let traj = Trajectory::from_positions(&arc(20), 0.5).unwrap();
    let out = optimize(&traj, &[], &[], &OptimizerParams::default()).unwrap();
    assert!(out.converged);
    assert_eq!(out.iterations, 0);
    assert_eq!(out.trajectory, traj);

    let one_step = OptimizerParams {
        max_iterations: 1,
        convergence_epsilon: 1e-300,
        ..OptimizerParams::default()
    };
    let out = optimize(&traj, &[], &[], &one_step).unwrap();
    for (a, b) in out.trajectory.positions().iter().zip(traj.positions()) {
        assert!((a - b).norm() <= 1e-12);
    }
}

#[test]
fn farther_increases_distance_of_closest_waypoints() {
    let traj = Trajectory::from_positions(&arc(40), 1.0).unwrap();
    // Sphere just inside the arc, grazing its top.
    let obj = sphere("s", Vec3::new(0.0, 0.55, 0.1), 0.2);
    let scene = vec![obj.clone()];
    let fields = PotentialField::fields_for(&[Constraint::distance(Sign::Plus, "s")], &scene).unwrap();
    let out = optimize(&traj, &fields, &scene, &OptimizerParams::default()).unwrap();
    let idx = crate::trajectory::closest_waypoint_indices(&traj, &obj, 5).unwrap();
    let mean = |t: &Trajectory| -> f64 {
        idx.iter().map(|&i| obj.proximity(&t.waypoints()[i].position).signed_distance).sum::<f64>() / 5.0
    };
    assert!(mean(&out.trajectory) > mean(&traj) + 0.05, "{} vs {}", mean(&out.trajectory), mean(&traj));
}

#[test]
fn closer_does_not_penetrate_a_cuboid() {
    let traj = Trajectory::from_positions(&arc(48), 1.0).unwrap();
    let obj = SceneObject::new(
        "box",
        "box",
        Primitive::Cuboid { half_extents: Vec3::new(0.4, 0.1, 0.1) },
        Pose::from_translation(Vec3::new(0.0, 0.45, 0.1)),
    );
    let scene = vec![obj.clone()];
    let fields = PotentialField::fields_for(
        &[Constraint::distance(Sign::Minus, "box").with_intensity(2.0).with_importance(2.0)],
        &scene,
    )
    .unwrap();
    let out = optimize(&traj, &fields, &scene, &OptimizerParams::default()).unwrap();
    let min = out
        .trajectory
        .positions()
        .iter()
        .map(|p| obj.proximity(p).signed_distance)
        .fold(f64::INFINITY, f64::min);
    assert!(min >= -1e-6, "min signed distance {min}");
    let before = traj.positions().iter().map(|p| obj.proximity(p).signed_distance).fold(f64::INFINITY, f64::min);
    assert!(min < before);
}

#[test]
fn endpoints_stay_bit_identical() {
    let traj = Trajectory::from_positions(&arc(30), 1.0).unwrap();
    let scene = vec![sphere("s", Vec3::new(-0.8, 0.1, 0.1), 0.05)];
    let fields = PotentialField::fields_for(
        &[Constraint::cartesian(Vec3::z()), Constraint::distance(Sign::Plus, "s")],
        &scene,
    )
    .unwrap();
    let out = optimize(&traj, &fields, &scene, &OptimizerParams::default()).unwrap();
    let (a, b) = (traj.waypoints(), out.trajectory.waypoints());
    assert_eq!(a[0], b[0]);
    assert_eq!(a[a.len() - 1], b[b.len() - 1]);
}

#[test]
fn non_finite_forces_are_reported() {
    let traj = Trajectory::from_positions(&line(8), 1.0).unwrap();
    let params = OptimizerParams { w_self: 1e308, k: 1e308, eta: 1e308, ..OptimizerParams::default() };
    let fields = PotentialField::fields_for(&[Constraint::cartesian(Vec3::y())], &[]).unwrap();
    let err = optimize(&traj, &fields, &[], &params).unwrap_err();
    assert!(matches!(err, OptimizeError::NonFiniteForce { .. }), "{err:?}");
}

#[test]
fn unknown_targets_and_bad_params_are_rejected() {
    assert_eq!(
        PotentialField::new(Constraint::distance(Sign::Plus, "ghost"), &[]),
        Err(OptimizeError::UnknownObject("ghost".into()))
    );
    let bad = OptimizerParams { eta: 0.0, ..OptimizerParams::default() };
    assert!(matches!(bad.validate(), Err(OptimizeError::InvalidParameter { name: "eta", .. })));
    let parsed: OptimizerParams = toml::from_str("eta = 0.02\nproximity = \"centroid\"").unwrap();
    assert_eq!(parsed.eta, 0.02);
    assert_eq!(parsed.proximity, ProximityModel::Centroid);
    assert!(toml::from_str::<OptimizerParams>("bogus = 1").is_err());
}

#[test]
fn speed_profile_cases() {
    let table = SceneObject::new(
        "table",
        "table",
        Primitive::Cuboid { half_extents: Vec3::new(0.5, 0.3, 0.05) },
        Pose::identity(),
    )
    .with_influence_radius(0.3);
    let scene = vec![table];
    let pts = vec![
        Vec3::new(-2.0, 0.0, 0.5),
        Vec3::new(0.0, 0.0, 0.05),
        Vec3::new(0.0, 0.0, 0.2),
        Vec3::new(2.0, 0.0, 0.5),
    ];
    let traj = Trajectory::from_positions(&pts, 1.0).unwrap();
    assert_eq!(apply_speed_profile(&traj, &[], ProximityModel::Geometric).unwrap(), traj);

    let slower = PotentialField::fields_for(&[Constraint::speed(Sign::Minus, "table")], &scene).unwrap();
    let out = apply_speed_profile(&traj, &slower, ProximityModel::Geometric).unwrap();
    let v = out.speeds();
    assert_eq!(v[0], 1.0);
    assert_eq!(v[3], 1.0);
    assert_relative_eq!(v[1], SPEED_FACTOR_RANGE.0);
    assert_relative_eq!(v[2], 1.0 - (1.0 - 0.15 / 0.3), epsilon = 1e-12);

    let faster = PotentialField::fields_for(&[Constraint::speed(Sign::Plus, "table").with_intensity(2.0).with_importance(2.0)], &scene).unwrap();
    let out = apply_speed_profile(&traj, &faster, ProximityModel::Geometric).unwrap();
    assert_relative_eq!(out.speeds()[1], SPEED_FACTOR_RANGE.1);
}

fn translated(objects: &[SceneObject], t: Vec3) -> Vec<SceneObject> {
    objects
        .iter()
        .map(|o| {
            let mut o = o.clone();
            o.pose = Pose::new(o.pose.position + t, o.pose.orientation);
            o
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn translation_equivariance(tx in -2.0..2.0f64, ty in -2.0..2.0f64, tz in -2.0..2.0f64, sign in prop::bool::ANY) {
        let t = Vec3::new(tx, ty, tz);
        let traj = Trajectory::from_positions(&arc(24), 1.0).unwrap();
        let scene = vec![sphere("s", Vec3::new(0.1, 0.5, 0.1), 0.15)];
        let s = if sign { Sign::Plus } else { Sign::Minus };
        let constraints = [Constraint::distance(s, "s")];
        let params = OptimizerParams::default();

        let base = optimize(&traj, &PotentialField::fields_for(&constraints, &scene).unwrap(), &scene, &params).unwrap();

        let moved_pts: Vec<Vec3> = traj.positions().iter().map(|p| p + t).collect();
        let moved_traj = Trajectory::from_positions(&moved_pts, 1.0).unwrap();
        let moved_scene = translated(&scene, t);
        let moved = optimize(&moved_traj, &PotentialField::fields_for(&constraints, &moved_scene).unwrap(), &moved_scene, &params).unwrap();

        for (a, b) in base.trajectory.positions().iter().zip(moved.trajectory.positions()) {
            prop_assert!((a + t - b).norm() < 1e-7);
        }
    }
}
