use std::f64::consts::PI;

use cuspidal_core::io::{
    fmt_f64, from_json, joint_path_csv, read_json, to_json, write_text, Frame, IdentifyRecord, OptimizeRecord,
    PathFile, PlanRecord, ResultFile, RobotFile, StartRecord,
};
use cuspidal_core::scenarios::{self, generate_helix, HelixOrientation};
use cuspidal_core::workpiece::OptimizerConfig;
use cuspidal_core::{
    analyze_repeatability, identify_cuspidal, optimize_workpiece_pose, plan_path, Config, Mat3, Planner, Pose64, Robot,
    TaskPath, Vec3,
};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e3..1e3f64, any::<f64>().prop_filter("finite", |x| x.is_finite())]
}

fn triple() -> impl Strategy<Value = [f64; 3]> {
    [finite(), finite(), finite()]
}

fn unit() -> impl Strategy<Value = Vec3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("away from zero", |(x, y, z)| x * x + y * y + z * z > 0.05)
        .prop_map(|(x, y, z)| Vec3::new(x, y, z).normalized().unwrap())
}

fn robot() -> impl Strategy<Value = Robot> {
    prop_oneof![Just(3usize), Just(6usize)].prop_flat_map(|n| {
        (
            prop::collection::vec(unit(), n),
            prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64), n),
            prop::option::of(prop::collection::vec((-PI..0.0f64, 0.1..PI), n)),
            "[a-z0-9-]{1,12}",
        )
            .prop_map(move |(axes, offsets, limits, name)| {
                let offsets = offsets.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect();
                let r = Robot::new(name, axes, offsets, Vec3::new(0.1, 0.0, 0.0)).unwrap();
                match limits {
                    Some(l) => r.with_limits(l).unwrap(),
                    None => r,
                }
            })
    })
}

fn path_file() -> impl Strategy<Value = PathFile> {
    (
        prop::collection::vec((triple(), prop::option::of([finite(), finite(), finite(), finite()])), 2..20),
        0.001..1.0f64,
        any::<bool>(),
        any::<bool>(),
    )
        .prop_map(|(samples, dlambda, closed, workpiece)| PathFile {
            frame: if workpiece { Frame::Workpiece } else { Frame::Base },
            closed,
            dlambda,
            samples: samples.into_iter().map(|(p, q_wxyz)| cuspidal_core::io::PathSample { p, q_wxyz }).collect(),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn robot_files_round_trip(r in robot()) {
        let file = RobotFile::from_robot(&r);
        let back: RobotFile = from_json(&to_json(&file)).unwrap();
        prop_assert_eq!(&back, &file);
        let (loaded, warnings) = back.to_robot().unwrap();
        prop_assert!(warnings.is_empty());
        prop_assert_eq!(loaded, r);
    }

    #[test]
    fn path_files_round_trip_losslessly(f in path_file()) {
        let back: PathFile = from_json(&to_json(&f)).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn loaded_paths_have_unit_quaternions(f in path_file()) {
        prop_assume!(f.samples.iter().all(|s| s.q_wxyz.is_none_or(|q| q.iter().map(|v| v * v).sum::<f64>() > 1e-6)));
        prop_assume!(f.samples.iter().all(|s| s.q_wxyz.is_none_or(|q| q.iter().all(|v| v.abs() < 1e100))));
        let f = PathFile { closed: false, ..f };
        let path = f.to_task_path().unwrap();
        prop_assert_eq!(path.len(), f.samples.len());
        for (pose, s) in path.poses().iter().zip(&f.samples) {
            prop_assert!(pose.rotation.orthonormality_error() < 1e-9);
            prop_assert_eq!(pose.position.to_array(), s.p);
        }
    }

    #[test]
    fn csv_numbers_parse_back_exactly(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = fmt_f64(x);
        prop_assert_eq!(s.parse::<f64>().unwrap(), x);
        let mantissa = s.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
        prop_assert_eq!(mantissa.len(), 17);
    }
}

#[test]
fn off_unit_axes_are_normalized_with_a_warning() {
    let mut f = RobotFile::from_robot(&scenarios::canonical_3r());
    f.axes[1] = [0.0, 2.0, 0.0];
    let (r, warnings) = f.to_robot().unwrap();
    assert_eq!(warnings.len(), 1);
    assert_eq!(r.axes()[1], Vec3::new(0.0, 1.0, 0.0));
    f.dof = 4;
    assert!(f.to_robot().is_err());
}

#[test]
fn malformed_documents_are_rejected() {
    assert!(from_json::<RobotFile>("{\"name\": 3}").is_err());
    assert!(from_json::<PathFile>("{\"frame\": \"tool\", \"closed\": false, \"dlambda\": 1, \"samples\": []}").is_err());
    let one = "{\"frame\": \"base\", \"closed\": false, \"dlambda\": 1, \"samples\": [{\"p\": [0, 0, 0]}]}";
    assert!(from_json::<PathFile>(one).unwrap().to_task_path().is_err());
    assert!(read_json::<RobotFile>("/nonexistent/robot.json").is_err());
}

#[test]
fn result_files_round_trip() {
    let robot = scenarios::canonical_3r();
    let ik = Config::default();
    let verdict = identify_cuspidal(&robot, 0, 50, 1000, &ik).unwrap();
    let undetermined = identify_cuspidal(&scenarios::elbow_3r(), 0, 5, 200, &ik).unwrap();
    let loop_path = scenarios::cusp_loop();
    let planned = plan_path(&robot, &loop_path, &Planner::default(), &ik).unwrap();
    let report = analyze_repeatability(&robot, &loop_path, &Planner::default(), &ik).unwrap();
    let blocked = plan_path(&robot, &scenarios::infeasible_line(), &Planner::default(), &ik).unwrap();
    let tp = generate_helix(0.3, 0.2, 1.0, 30, HelixOrientation::Fixed).unwrap();
    let mut cfg = OptimizerConfig::<f64> { n_starts: 2, seed: 1, ..OptimizerConfig::default() };
    cfg.nelder_mead.max_evals = 30;
    let results = optimize_workpiece_pose(&robot, &tp, &cfg).unwrap();
    let docs = [
        ResultFile::Identify(IdentifyRecord::new(robot.name(), 0, 50, &verdict)),
        ResultFile::Identify(IdentifyRecord::new("3r-elbow", 0, 5, &undetermined)),
        ResultFile::Plan(PlanRecord::new(robot.name(), &planned, Some(&report))),
        ResultFile::Plan(PlanRecord::new(robot.name(), &blocked, None)),
        ResultFile::Optimize(OptimizeRecord {
            robot: robot.name().into(),
            seed: 1,
            starts: results.iter().map(StartRecord::from_result).collect(),
        }),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (i, d) in docs.iter().enumerate() {
        let path = dir.path().join(format!("{i}.json"));
        write_text(&path, &to_json(d)).unwrap();
        let back: ResultFile = read_json(&path).unwrap();
        assert_eq!(&back, d);
    }
    let w = IdentifyRecord::new(robot.name(), 0, 50, &verdict).witness.unwrap().to_witness();
    let v = verdict.witness().unwrap();
    assert_eq!((&w.q_a, &w.q_b, w.min_abs_detj), (&v.q_a, &v.q_b, v.min_abs_detj));
    // The pose passes through a quaternion, exact only to rounding.
    assert!(w.pose.rotation.max_abs_diff(&v.pose.rotation) < 1e-14);
    assert_eq!(w.pose.position, v.pose.position);
}

#[test]
fn joint_path_csv_has_one_row_per_sample() {
    let robot = scenarios::canonical_3r();
    let path = TaskPath::new(
        (0..5).map(|k| Pose64::new(Mat3::identity(), Vec3::new(2.0 + 0.1 * k as f64, 0.0, 1.0))).collect(),
        0.1,
    )
    .unwrap();
    let r = plan_path(&robot, &path, &Planner::default(), &Config::default()).unwrap();
    let csv = joint_path_csv(r.path().unwrap());
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "lambda,q1,q2,q3,det_j");
    assert_eq!(lines.len(), 6);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 5));
}
