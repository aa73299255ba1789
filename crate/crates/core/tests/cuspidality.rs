use cuspidal_core::cuspidality::{validate_witness, DEFAULT_RELATIVE_TOL};
use cuspidal_core::scenarios;
use cuspidal_core::{forward_kinematics, identify_cuspidal, nonsingular_pair_check, Config, Robot, Verdict};
use proptest::prelude::*;

fn assert_witness(robot: &Robot, v: &Verdict<f64>) {
    let w = v.witness().expect("cuspidal verdict");
    let cfg = Config::default();
    for q in [&w.q_a, &w.q_b] {
        let (dp, dr) = forward_kinematics(robot, q).unwrap().error_to(&w.pose);
        let dr = if robot.dof() == 3 { 0.0 } else { dr };
        assert!(dp + dr <= cfg.exact_tol, "witness end off by {dp} m, {dr} rad");
    }
    assert!(validate_witness(robot, w, 10 * w.interp_samples, cfg.exact_tol).unwrap());
    let c = nonsingular_pair_check(robot, &w.q_a, &w.q_b, 10 * w.interp_samples, DEFAULT_RELATIVE_TOL).unwrap();
    assert!(c.nonsingular && c.min_abs_detj > c.singularity_tol);
}

#[test]
fn canonical_3r_is_proven_cuspidal() {
    let robot = scenarios::canonical_3r();
    let v = identify_cuspidal(&robot, 1, 50, 1000, &Config::default()).unwrap();
    assert_witness(&robot, &v);
}

#[test]
fn three_parallel_robot_is_proven_cuspidal() {
    let robot = scenarios::three_parallel_cuspidal();
    let v = identify_cuspidal(&robot, 0, 200, 1000, &Config::default()).unwrap();
    assert_witness(&robot, &v);
}

#[test]
fn wrist_arm_is_proven_cuspidal() {
    let robot = scenarios::wrist_6r();
    let v = identify_cuspidal(&robot, 0, 200, 1000, &Config::default()).unwrap();
    assert_witness(&robot, &v);
}

#[test]
fn elbow_stays_undetermined() {
    let v = identify_cuspidal(&scenarios::elbow_3r(), 3, 200, 1000, &Config::default()).unwrap();
    match v {
        Verdict::Undetermined { poses_tried, pairs_tested } => {
            assert_eq!(poses_tried, 200);
            assert!(pairs_tested > 0);
        }
        Verdict::ProvenCuspidal(w) => panic!("elbow reported cuspidal: {w:?}"),
    }
}

#[test]
fn built_in_three_parallel_witness_is_nonsingular() {
    let robot = scenarios::three_parallel_cuspidal();
    let (a, b) = scenarios::three_parallel_witness::<f64>();
    let c = nonsingular_pair_check(&robot, &a, &b, 1000, DEFAULT_RELATIVE_TOL).unwrap();
    assert!(c.nonsingular, "min |det J| {}", c.min_abs_detj);
}

#[test]
fn segment_through_a_singularity_is_rejected() {
    // Elbow solutions of one pose straddle the stretched-arm singularity.
    let robot = scenarios::elbow_3r();
    let c = nonsingular_pair_check(&robot, &[0.0, 0.3, 0.8], &[0.0, 1.1, -0.8], 1000, DEFAULT_RELATIVE_TOL).unwrap();
    assert!(!c.nonsingular);
}

#[test]
fn bad_arguments_are_rejected() {
    let robot = scenarios::canonical_3r();
    let cfg = Config::default();
    assert!(identify_cuspidal(&robot, 0, 0, 1000, &cfg).is_err());
    assert!(identify_cuspidal(&robot, 0, 10, 10, &cfg).is_err());
    assert!(nonsingular_pair_check(&robot, &[0.0; 2], &[0.0; 3], 1000, DEFAULT_RELATIVE_TOL).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn verdicts_are_reproducible(seed in any::<u64>()) {
        let robot = scenarios::canonical_3r();
        let cfg = Config::default();
        let a = identify_cuspidal(&robot, seed, 20, 200, &cfg).unwrap();
        let b = identify_cuspidal(&robot, seed, 20, 200, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        if let Some(w) = a.witness() {
            prop_assert!(validate_witness(&robot, w, 10 * w.interp_samples, cfg.exact_tol).unwrap());
        }
    }
}
