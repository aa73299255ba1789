use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuspidal-kit")).args(args).env_remove("CUSPIDAL_KIT_THREADS").output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn identify_exit_codes() {
    let o = kit(&["identify", "--robot", "3r-canonical", "--max-poses", "50"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["kind"], "identify");
    assert_eq!(v["verdict"], "proven_cuspidal");
    assert_eq!(v["witness"]["q_a"].as_array().unwrap().len(), 3);

    let o = kit(&["identify", "--robot", "3r-elbow", "--max-poses", "20"]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["verdict"], "undetermined");

    let o = kit(&["identify", "--robot", "no-such-robot"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("3r-canonical"));
}

#[test]
fn robot_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("arm.json");
    std::fs::write(
        &file,
        r#"{"name": "scaled", "dof": 3, "axes": [[0, 0, 2], [0, 1, 0], [0, 0, 1]],
            "offsets": [[0, 0, 0], [1, 0, 0], [2, 1, 0]], "tool_offset": [1.5, 0, 0]}"#,
    )
    .unwrap();
    let o = kit(&["identify", "--robot", p(&file), "--max-poses", "50"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("normalized"));
    assert_eq!(json(&o)["robot"], "scaled");

    std::fs::write(&file, r#"{"name": "broken", "dof": 4}"#).unwrap();
    assert_eq!(code(&kit(&["identify", "--robot", p(&file)])), 2);
}

#[test]
fn plan_reports_feasibility_through_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.json");
    let csv = dir.path().join("plan.csv");
    let o = kit(&["plan", "--robot", "3r-canonical", "--path", "3r-control-line", "--out", p(&out), "--csv", p(&csv)]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["kind"], "plan");
    assert_eq!(v["feasible"], true);
    assert_eq!(std::fs::read(&out).unwrap(), o.stdout);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert!(rows.starts_with("lambda,q1,q2,q3,det_j\n"));
    assert_eq!(rows.lines().count(), 101);

    let o = kit(&["plan", "--robot", "3r-canonical", "--path", "3r-infeasible-line"]);
    assert_eq!(code(&o), 4);
    assert_eq!(json(&o)["feasible"], false);
    assert!(String::from_utf8_lossy(&o.stderr).contains("last layer reached"));

    let o = kit(&["plan", "--robot", "3r-canonical", "--path", "3r-cusp-loop", "--nonsingular"]);
    assert_eq!(code(&o), 0);
    let r = &json(&o)["repeatability"];
    assert!(!r["nonrepeatable_transitions"].as_array().unwrap().is_empty());

    assert_eq!(code(&kit(&["plan", "--robot", "3r-canonical", "--path", "helix"])), 2);
    assert_eq!(code(&kit(&["plan", "--robot", "3r-canonical", "--path", "3r-control-line", "--skip-depth", "0"])), 2);
}

#[test]
fn helix_and_optimize_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let helix = dir.path().join("helix.json");
    let o = kit(&["helix", "--turns", "1", "--samples", "40", "--out", p(&helix)]);
    assert_eq!(code(&o), 0);
    let path: Value = serde_json::from_str(&std::fs::read_to_string(&helix).unwrap()).unwrap();
    assert_eq!(path["frame"], "workpiece");
    assert_eq!(path["samples"].as_array().unwrap().len(), 40);

    let args = ["optimize", "--robot", "3r-canonical", "--toolpath", p(&helix), "--seed", "4", "--max-evals", "25"];
    let csv = dir.path().join("history.csv");
    let mut with_csv = args.to_vec();
    with_csv.extend(["--csv", p(&csv)]);
    let a = kit(&with_csv);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let b =
        Command::new(env!("CARGO_BIN_EXE_cuspidal-kit")).args(args).env("CUSPIDAL_KIT_THREADS", "2").output().unwrap();
    assert_eq!(code(&b), 0);
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["kind"], "optimize");
    assert_eq!(v["starts"].as_array().unwrap().len(), 2);
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 1 + 2 * 25);

    assert_eq!(code(&kit(&["optimize", "--robot", "3r-canonical", "--toolpath", "3r-control-line"])), 2);
}

#[test]
fn unreachable_toolpath_has_no_start() {
    let dir = tempfile::tempdir().unwrap();
    let helix = dir.path().join("huge.json");
    assert_eq!(code(&kit(&["helix", "--radius", "50", "--samples", "20", "--out", p(&helix)])), 0);
    let o = kit(&["optimize", "--robot", "3r-canonical", "--toolpath", p(&helix), "--max-evals", "5"]);
    assert_eq!(code(&o), 5);
}

#[test]
fn map_writes_a_count_grid() {
    let o =
        kit(&["map", "--robot", "3r-canonical", "--rho-range", "0", "4", "--z-range", "-2", "2", "--grid", "8", "6"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(lines[0].starts_with("rho\\z,"));
    let counts: Vec<usize> = lines[1..].iter().flat_map(|l| l.split(',').skip(1).map(|c| c.parse().unwrap())).collect();
    assert_eq!(counts.len(), 48);
    assert!(counts.contains(&2) && counts.contains(&4));
    assert_eq!(
        code(&kit(&[
            "map",
            "--robot",
            "3parallel-cuspidal",
            "--rho-range",
            "0",
            "1",
            "--z-range",
            "0",
            "1",
            "--grid",
            "2",
            "2"
        ])),
        2
    );
}

#[test]
fn bad_thread_override_is_an_input_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_cuspidal-kit"))
        .args(["helix", "--samples", "10"])
        .env("CUSPIDAL_KIT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
