//! JSON robot, path and result files, and CSV emitters for plotting.
//!
//! File records hold plain `f64` data so that `load(save(x)) == x` holds
//! bit for bit; conversion to library types happens in `to_*` methods.

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cuspidality::{Verdict, Witness};
use crate::error::{Error, Result};
use crate::kinematics::{Pose, RobotModel};
use crate::linalg::{Mat3, Vec3};
use crate::planner::{JointPath, PlanOutcome, PlanResult, RepeatabilityReport, TaskPath};
use crate::workpiece::{OptResult, ReducedParams, Termination};

/// Axes further than this from unit length are reported when normalized.
pub const AXIS_NORM_TOL: f64 = 1e-6;

pub fn read_json<R: DeserializeOwned>(path: impl AsRef<Path>) -> Result<R> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    from_json(&text)
}

pub fn from_json<R: DeserializeOwned>(text: &str) -> Result<R> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

pub fn to_json<R: Serialize>(value: &R) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("records serialize");
    s.push('\n');
    s
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotFile {
    pub name: String,
    pub dof: usize,
    pub axes: Vec<[f64; 3]>,
    pub offsets: Vec<[f64; 3]>,
    pub tool_offset: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint_limits: Option<Vec<[f64; 2]>>,
}

impl RobotFile {
    pub fn from_robot(robot: &RobotModel<f64>) -> Self {
        Self {
            name: robot.name().to_string(),
            dof: robot.dof(),
            axes: robot.axes().iter().map(|h| h.to_array()).collect(),
            offsets: robot.offsets().iter().map(|p| p.to_array()).collect(),
            tool_offset: robot.tool().to_array(),
            joint_limits: robot.limits().map(|l| l.iter().map(|&(lo, hi)| [lo, hi]).collect()),
        }
    }

    /// Builds the robot with unit axes; returns one warning per axis whose
    /// length was off by more than [`AXIS_NORM_TOL`].
    pub fn to_robot(&self) -> Result<(RobotModel<f64>, Vec<String>)> {
        if self.axes.len() != self.dof {
            return Err(Error::Format(format!("dof is {} but {} axes are given", self.dof, self.axes.len())));
        }
        let warnings = self
            .axes
            .iter()
            .enumerate()
            .filter_map(|(i, h)| {
                let n = Vec3::from_array(*h).norm();
                ((n - 1.0).abs() > AXIS_NORM_TOL).then(|| format!("axis {i} has length {n}; normalized"))
            })
            .collect();
        let robot = RobotModel::new(
            self.name.clone(),
            self.axes.iter().map(|&h| Vec3::from_array(h)).collect(),
            self.offsets.iter().map(|&p| Vec3::from_array(p)).collect(),
            Vec3::from_array(self.tool_offset),
        )?;
        let robot = match &self.joint_limits {
            Some(l) => robot.with_limits(l.iter().map(|&[lo, hi]| (lo, hi)).collect())?,
            None => robot,
        };
        Ok((robot, warnings))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Base,
    Workpiece,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub p: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_wxyz: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathFile {
    pub frame: Frame,
    pub closed: bool,
    pub dlambda: f64,
    pub samples: Vec<PathSample>,
}

impl PathFile {
    /// Records `path`; orientations are written only when `orientation` is set.
    pub fn from_task_path(path: &TaskPath<f64>, frame: Frame, orientation: bool) -> Self {
        let samples = path
            .poses()
            .iter()
            .map(|pose| PathSample {
                p: pose.position.to_array(),
                q_wxyz: orientation.then(|| pose.rotation.to_quat()),
            })
            .collect();
        Self { frame, closed: path.is_closed(), dlambda: path.dlambda(), samples }
    }

    /// Samples without an orientation get the identity rotation; quaternions
    /// are normalized.
    pub fn to_task_path(&self) -> Result<TaskPath<f64>> {
        let poses = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let rotation = match s.q_wxyz {
                    Some(q) => {
                        let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                        if !(n > 0.0) || !n.is_finite() {
                            return Err(Error::Format(format!("sample {k} has a degenerate quaternion")));
                        }
                        Mat3::from_quat(q.map(|v| v / n))
                    }
                    None => Mat3::identity(),
                };
                Ok(Pose::new(rotation, Vec3::from_array(s.p)))
            })
            .collect::<Result<Vec<_>>>()?;
        TaskPath::with_closed(poses, self.dlambda, self.closed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub p: [f64; 3],
    pub q_wxyz: [f64; 4],
}

impl PoseRecord {
    pub fn from_pose(pose: &Pose<f64>) -> Self {
        Self { p: pose.position.to_array(), q_wxyz: pose.rotation.to_quat() }
    }

    pub fn to_pose(&self) -> Pose<f64> {
        Pose::new(Mat3::from_quat(self.q_wxyz), Vec3::from_array(self.p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRecord {
    pub pose: PoseRecord,
    pub q_a: Vec<f64>,
    pub q_b: Vec<f64>,
    pub min_abs_det_j: f64,
    pub interp_samples: usize,
}

impl WitnessRecord {
    pub fn from_witness(w: &Witness<f64>) -> Self {
        Self {
            pose: PoseRecord::from_pose(&w.pose),
            q_a: w.q_a.clone(),
            q_b: w.q_b.clone(),
            min_abs_det_j: w.min_abs_detj,
            interp_samples: w.interp_samples,
        }
    }

    pub fn to_witness(&self) -> Witness<f64> {
        Witness {
            pose: self.pose.to_pose(),
            q_a: self.q_a.clone(),
            q_b: self.q_b.clone(),
            min_abs_detj: self.min_abs_det_j,
            interp_samples: self.interp_samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifyRecord {
    pub robot: String,
    pub seed: u64,
    pub max_poses: usize,
    /// `"proven_cuspidal"` or `"undetermined"`.
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poses_tried: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs_tested: Option<usize>,
}

impl IdentifyRecord {
    pub fn new(robot: &str, seed: u64, max_poses: usize, verdict: &Verdict<f64>) -> Self {
        let mut r = Self {
            robot: robot.to_string(),
            seed,
            max_poses,
            verdict: String::new(),
            witness: None,
            poses_tried: None,
            pairs_tested: None,
        };
        match verdict {
            Verdict::ProvenCuspidal(w) => {
                r.verdict = "proven_cuspidal".into();
                r.witness = Some(WitnessRecord::from_witness(w));
            }
            Verdict::Undetermined { poses_tried, pairs_tested } => {
                r.verdict = "undetermined".into();
                r.poses_tried = Some(*poses_tried);
                r.pairs_tested = Some(*pairs_tested);
            }
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryRecord {
    pub k: usize,
    pub lambda: f64,
    pub solution: usize,
    pub q: Vec<f64>,
    pub det_j: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPathRecord {
    pub cost: f64,
    pub total_weight: f64,
    pub rms: f64,
    pub entries: Vec<EntryRecord>,
}

impl JointPathRecord {
    pub fn from_path(p: &JointPath<f64>) -> Self {
        Self {
            cost: p.cost,
            total_weight: p.total_weight,
            rms: p.rms,
            entries: p
                .entries
                .iter()
                .map(|e| EntryRecord { k: e.k, lambda: e.lambda, solution: e.solution, q: e.q.clone(), det_j: e.det_j })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatabilityRecord {
    pub solutions: Vec<Vec<f64>>,
    pub connectivity: Vec<Vec<Option<f64>>>,
    pub regular_solutions: Vec<usize>,
    pub cycles: Vec<Vec<usize>>,
    pub nonrepeatable_transitions: Vec<[usize; 2]>,
}

impl RepeatabilityRecord {
    pub fn from_report(r: &RepeatabilityReport<f64>) -> Self {
        Self {
            solutions: r.solutions.clone(),
            connectivity: r.connectivity.clone(),
            regular_solutions: r.regular_solutions.clone(),
            cycles: r.cycles.clone(),
            nonrepeatable_transitions: r.nonrepeatable_transitions.iter().map(|&(m, l)| [m, l]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRecord {
    pub robot: String,
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<JointPathRecord>,
    /// Last layer reachable from the start and first layer that is not,
    /// when infeasible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_reached: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_unreached: Option<usize>,
    pub layer_counts: Vec<usize>,
    pub exact_layer_counts: Vec<usize>,
    pub vertex_count: usize,
    pub edge_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeatability: Option<RepeatabilityRecord>,
}

impl PlanRecord {
    pub fn new(robot: &str, r: &PlanResult<f64>, repeat: Option<&RepeatabilityReport<f64>>) -> Self {
        let (path, last_reached, first_unreached) = match &r.outcome {
            PlanOutcome::Feasible(p) => (Some(JointPathRecord::from_path(p)), None, None),
            PlanOutcome::Infeasible(i) => (None, i.last_reached, i.first_unreached),
        };
        Self {
            robot: robot.to_string(),
            feasible: r.is_feasible(),
            path,
            last_reached,
            first_unreached,
            layer_counts: r.layer_counts.clone(),
            exact_layer_counts: r.exact_layer_counts.clone(),
            vertex_count: r.vertex_count,
            edge_count: r.edge_count,
            repeatability: repeat.map(RepeatabilityRecord::from_report),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub v: [f64; 2],
    pub p_tilde: [f64; 3],
}

impl ParamsRecord {
    pub fn from_params(p: &ReducedParams<f64>) -> Self {
        Self { v: p.v, p_tilde: p.p_tilde.to_array() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartRecord {
    pub start_index: usize,
    pub feasible: bool,
    pub strict_feasible: bool,
    pub start: ParamsRecord,
    pub params: ParamsRecord,
    pub quat_wxyz: [f64; 4],
    pub p: [f64; 3],
    pub initial_value: f64,
    pub final_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_rms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_rms: Option<f64>,
    pub start_attempts: usize,
    pub evaluations: usize,
    /// `"simplex_size"`, `"value_spread"` or `"max_evaluations"`.
    pub termination: String,
    pub history: Vec<f64>,
}

impl StartRecord {
    pub fn from_result(r: &OptResult<f64>) -> Self {
        Self {
            start_index: r.start_index,
            feasible: r.feasible,
            strict_feasible: r.strict_feasible,
            start: ParamsRecord::from_params(&r.start),
            params: ParamsRecord::from_params(&r.params),
            quat_wxyz: r.pose.quat,
            p: r.pose.p.to_array(),
            initial_value: r.initial_value,
            final_value: r.final_value,
            initial_cost: r.initial_cost,
            final_cost: r.final_cost,
            initial_rms: r.initial_rms,
            final_rms: r.final_rms,
            start_attempts: r.start_attempts,
            evaluations: r.evaluations,
            termination: match r.termination {
                Termination::SimplexSize => "simplex_size",
                Termination::ValueSpread => "value_spread",
                Termination::MaxEvaluations => "max_evaluations",
            }
            .into(),
            history: r.history.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeRecord {
    pub robot: String,
    pub seed: u64,
    /// Ordered best first.
    pub starts: Vec<StartRecord>,
}

/// Any result document the command-line tool writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResultFile {
    Identify(IdentifyRecord),
    Plan(PlanRecord),
    Optimize(OptimizeRecord),
}

/// Fixed-width scientific notation with 17 significant digits, which
/// round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `lambda, q1..qn, det_j` per sample.
pub fn joint_path_csv(p: &JointPath<f64>) -> String {
    let dof = p.entries.first().map_or(0, |e| e.q.len());
    let mut s = String::from("lambda");
    for i in 1..=dof {
        let _ = write!(s, ",q{i}");
    }
    s.push_str(",det_j\n");
    for e in &p.entries {
        s.push_str(&fmt_f64(e.lambda));
        for &q in &e.q {
            s.push(',');
            s.push_str(&fmt_f64(q));
        }
        s.push(',');
        s.push_str(&fmt_f64(e.det_j));
        s.push('\n');
    }
    s
}

/// `start, iteration, value` per objective evaluation.
pub fn history_csv(results: &[OptResult<f64>]) -> String {
    let mut s = String::from("start,iteration,value\n");
    for r in results {
        for (i, v) in r.history.iter().enumerate() {
            let _ = writeln!(s, "{},{},{}", r.start_index, i + 1, fmt_f64(*v));
        }
    }
    s
}

/// Solution-count grid; one row per `rho` cell and one column per `z` cell,
/// with the cell centers in the header row and first column.
pub fn count_map_csv(counts: &[Vec<usize>], rho: (f64, f64), z: (f64, f64)) -> String {
    let n_rho = counts.len();
    let n_z = counts.first().map_or(0, Vec::len);
    let center = |(a, b): (f64, f64), n: usize, i: usize| a + (b - a) * (i as f64 + 0.5) / n as f64;
    let mut s = String::from("rho\\z");
    for j in 0..n_z {
        s.push(',');
        s.push_str(&fmt_f64(center(z, n_z, j)));
    }
    s.push('\n');
    for (i, row) in counts.iter().enumerate() {
        s.push_str(&fmt_f64(center(rho, n_rho, i)));
        for c in row {
            let _ = write!(s, ",{c}");
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{canonical_3r, line_path};

    #[test]
    fn robot_file_round_trip() {
        let r = canonical_3r::<f64>().with_limits(vec![(-3.0, 3.0); 3]).unwrap();
        let f = RobotFile::from_robot(&r);
        let back: RobotFile = from_json(&to_json(&f)).unwrap();
        assert_eq!(back, f);
        let (r2, warn) = back.to_robot().unwrap();
        assert!(warn.is_empty());
        assert_eq!(r2, r);
    }

    #[test]
    fn axes_are_normalized_with_warning() {
        let mut f = RobotFile::from_robot(&canonical_3r::<f64>());
        f.axes[1] = [0.0, 0.0, 2.0];
        let (r, warn) = f.to_robot().unwrap();
        assert_eq!(warn.len(), 1);
        assert!((r.axes()[1].norm() - 1.0).abs() < 1e-15);
        f.dof = 6;
        assert!(f.to_robot().is_err());
    }

    #[test]
    fn path_file_round_trip() {
        let tp = line_path(Vec3::new(2.0, 0.0, 0.5), Vec3::new(2.5, 0.1, 0.2), 7).unwrap();
        let f = PathFile::from_task_path(&tp, Frame::Base, false);
        let back: PathFile = from_json(&to_json(&f)).unwrap();
        assert_eq!(back, f);
        let tp2 = back.to_task_path().unwrap();
        assert_eq!(tp2.poses(), tp.poses());
        assert!(from_json::<PathFile>(r#"{"frame":"tool","closed":false,"dlambda":1,"samples":[]}"#).is_err());
    }

    #[test]
    fn csv_uses_seventeen_digits() {
        let x = 0.1f64 + 0.2;
        let s = fmt_f64(x);
        assert_eq!(s.parse::<f64>().unwrap(), x);
        assert_eq!(s.trim_start_matches('-').split('e').next().unwrap().len(), 18);
        let csv = count_map_csv(&[vec![0, 2], vec![4, 2]], (0.0, 2.0), (-1.0, 1.0));
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(2).unwrap().ends_with(",4,2"));
    }
}
