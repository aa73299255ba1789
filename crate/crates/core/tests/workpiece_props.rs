use std::f64::consts::PI;

use cuspidal_core::scenarios::{self, generate_helix, HelixOrientation};
use cuspidal_core::workpiece::{objective_full, NelderMeadOptions, ObjectiveConfig, OptimizerConfig, INFEASIBLE_COST};
use cuspidal_core::{
    decompose_rz_rxy, nelder_mead, objective, optimize_workpiece_pose, random_feasible_start, reduced_to_pose,
    transform_toolpath, Error, Mat3, Path64, Pose64, ReducedParams, Vec3, WorkpiecePose,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_helix() -> Path64 {
    generate_helix(0.3, 0.2, 1.0, 40, HelixOrientation::Fixed).unwrap()
}

fn rotation() -> impl Strategy<Value = Mat3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("nonzero", |(a, b, c, d)| a * a + b * b + c * c + d * d > 0.05)
        .prop_map(|(a, b, c, d)| Mat3::from_quat([a, b, c, d]))
}

fn vector(lo: f64, hi: f64) -> impl Strategy<Value = Vec3<f64>> {
    (lo..hi, lo..hi, lo..hi).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

/// Placements around the canonical arm's workspace, feasible or not.
fn placement() -> impl Strategy<Value = WorkpiecePose<f64>> {
    (rotation(), vector(-3.0, 3.0)).prop_map(|(r, p)| WorkpiecePose::from_pose(&Pose64::new(r, p)))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quaternion_scale_is_irrelevant(wp in placement(), s in 0.5..2.0f64) {
        let robot = scenarios::canonical_3r();
        let tp = small_helix();
        let cfg = ObjectiveConfig::default();
        let scaled = WorkpiecePose { quat: wp.quat.map(|c| s * c), p: wp.p };
        let (a, b) = (objective_full(&robot, &tp, &wp, &cfg), objective_full(&robot, &tp, &scaled, &cfg));
        prop_assert!(rel(a, b) < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn rotation_about_the_first_axis_is_irrelevant(wp in placement(), alpha in -PI..PI) {
        let robot = scenarios::canonical_3r();
        let tp = small_helix();
        let cfg = ObjectiveConfig::default();
        let rz = Mat3::rot_z(alpha);
        let turned = WorkpiecePose::from_pose(&Pose64::new(rz * wp.rotation(), rz * wp.p));
        let (a, b) = (objective_full(&robot, &tp, &wp, &cfg), objective_full(&robot, &tp, &turned, &cfg));
        prop_assert!(rel(a, b) < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn rotations_split_into_z_and_tilt(r in rotation()) {
        let (theta, tilt) = decompose_rz_rxy(&r);
        prop_assert!(theta > -PI && theta <= PI);
        prop_assert!((Mat3::rot_z(theta) * tilt).max_abs_diff(&r) < 1e-12);
        let q = tilt.to_quat();
        prop_assert!(q[3].abs() < 1e-12, "tilt quaternion {q:?}");
    }

    #[test]
    fn transform_is_equivariant(a in placement(), b in placement()) {
        let tp = generate_helix(0.3, 0.2, 1.0, 40, HelixOrientation::TangentFollowing).unwrap();
        let ab = WorkpiecePose::from_pose(&a.to_pose().compose(&b.to_pose()));
        let direct = transform_toolpath(&ab, &tp).unwrap();
        let staged = transform_toolpath(&a, &transform_toolpath(&b, &tp).unwrap()).unwrap();
        for (x, y) in direct.poses().iter().zip(staged.poses()) {
            prop_assert!((x.position - y.position).max_abs() < 1e-12);
            prop_assert!(x.rotation.max_abs_diff(&y.rotation) < 1e-12);
        }
        prop_assert_eq!(direct.dlambda(), tp.dlambda());
    }

    #[test]
    fn reduced_parameters_give_unit_tilts(vx in -1.5..1.5f64, vy in -1.5..1.5f64, p in vector(-2.0, 2.0)) {
        let x = ReducedParams { v: [vx, vy], p_tilde: p };
        let wp = reduced_to_pose(&x);
        prop_assert!((wp.quat_norm() - 1.0).abs() < 1e-12);
        prop_assert_eq!(wp.quat[3], 0.0);
        prop_assert!(wp.quat[0] >= 0.0);
        prop_assert_eq!(x.is_clamped(), vx * vx + vy * vy > 1.0);
        prop_assert!((wp.rotation().transpose() * wp.p - p).max_abs() < 1e-12);
        prop_assert_eq!(ReducedParams::from_slice(&x.to_vec()).unwrap(), x);
    }

    #[test]
    fn nelder_mead_history_never_increases(
        c in prop::collection::vec(-2.0..2.0f64, 3),
        x0 in prop::collection::vec(-3.0..3.0f64, 3),
        plateau in 0.5..4.0f64,
    ) {
        // Quadratic bowl with a flat sentinel region far from its center.
        let f = |x: &[f64]| {
            let d: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
            if d > plateau * plateau { 1e9 } else { d }
        };
        let r = nelder_mead(f, &x0, &NelderMeadOptions { max_evals: 400, ..NelderMeadOptions::default() });
        prop_assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(r.history.len(), r.evaluations);
        prop_assert!(r.f <= r.history[0]);
        prop_assert_eq!(r.f, *r.history.last().unwrap());
    }
}

#[test]
fn nelder_mead_finds_a_quadratic_minimum() {
    let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2);
    let r = nelder_mead(f, &[0.0, 0.0], &NelderMeadOptions::default());
    assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] + 2.0).abs() < 1e-4, "{:?}", r.x);
}

#[test]
fn feasible_start_is_feasible_and_reproducible() {
    let robot = scenarios::canonical_3r();
    let tp = small_helix();
    let cfg = ObjectiveConfig::default();
    let a = random_feasible_start(&robot, &tp, &mut ChaCha8Rng::seed_from_u64(3), None, 200, &cfg).unwrap();
    let b = random_feasible_start(&robot, &tp, &mut ChaCha8Rng::seed_from_u64(3), None, 200, &cfg).unwrap();
    assert_eq!(a, b);
    assert!(a.value < INFEASIBLE_COST);
    assert_eq!(objective(&robot, &tp, &a.params, &cfg), a.value);
}

#[test]
fn unreachable_toolpaths_report_no_start() {
    let robot = scenarios::canonical_3r();
    let huge = generate_helix(30.0, 1.0, 1.0, 40, HelixOrientation::Fixed).unwrap();
    let cfg = OptimizerConfig::<f64> { max_attempts: 5, ..OptimizerConfig::default() };
    assert!(matches!(optimize_workpiece_pose(&robot, &huge, &cfg), Err(Error::NoFeasibleStart { .. })));
}

#[test]
fn optimizer_improves_each_start_and_orders_results() {
    let robot = scenarios::canonical_3r();
    let tp = small_helix();
    let mut cfg = OptimizerConfig::<f64> { n_starts: 3, seed: 5, ..OptimizerConfig::default() };
    cfg.nelder_mead.max_evals = 150;
    let results = optimize_workpiece_pose(&robot, &tp, &cfg).unwrap();
    assert_eq!(results.len(), 3);
    for r in &results {
        assert!(r.final_value <= r.initial_value);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.feasible && r.evaluations <= 150);
        assert!((r.pose.quat_norm() - 1.0).abs() < 1e-12);
    }
    assert!(results.windows(2).all(|w| (w[0].final_value, w[0].start_index) <= (w[1].final_value, w[1].start_index)));
    let again = optimize_workpiece_pose(&robot, &tp, &cfg).unwrap();
    assert_eq!(results, again);
}
