//! Placement of a workpiece-frame toolpath in the robot base frame.
//!
//! The tool poses are given relative to the workpiece, so the base-frame
//! task path is `R_0T[k] = R_0P R_PT[k]`, `p_0T[k] = p_0P + R_0P p_PT[k]`.
//! When the first joint axis is `e_z` through the base origin, rotating the
//! whole placement about `e_z` leaves the planning problem unchanged, so the
//! search runs over the five remaining parameters: a tilt quaternion with
//! no `z` component and a translation expressed in the tilted frame.

mod nelder_mead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ik::IKConfig;
use crate::kinematics::{Pose, RobotModel};
use crate::linalg::{Mat3, Rot3, Vec3};
use crate::num::Real;
use crate::planner::{plan_path, PlanOutcome, PlannerConfig, TaskPath};

pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadResult, Termination};

/// A toolpath expressed in the workpiece frame.
pub type Toolpath<T> = TaskPath<T>;

/// Objective value assigned to placements the planner cannot follow.
pub const INFEASIBLE_COST: f64 = 1e9;

/// Rigid placement of the workpiece frame: quaternion `(w, x, y, z)` (not
/// necessarily unit; normalized before use) and translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkpiecePose<T> {
    pub quat: [T; 4],
    pub p: Vec3<T>,
}

impl<T: Real> WorkpiecePose<T> {
    pub fn identity() -> Self {
        Self { quat: [T::one(), T::zero(), T::zero(), T::zero()], p: Vec3::zeros() }
    }

    pub fn from_pose(pose: &Pose<T>) -> Self {
        Self { quat: pose.rotation.to_quat(), p: pose.position }
    }

    pub fn quat_norm(&self) -> T {
        self.quat.iter().map(|&c| c * c).sum::<T>().sqrt()
    }

    pub fn rotation(&self) -> Rot3<T> {
        Mat3::from_quat(self.quat)
    }

    pub fn to_pose(&self) -> Pose<T> {
        Pose::new(self.rotation(), self.p)
    }
}

/// Tilt `(v_x, v_y)` (vector part of a quaternion whose axis lies in the
/// `xy` plane) and translation `p~` in the tilted frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams<T> {
    pub v: [T; 2],
    pub p_tilde: Vec3<T>,
}

impl<T: Real> ReducedParams<T> {
    pub fn zeros() -> Self {
        Self { v: [T::zero(); 2], p_tilde: Vec3::zeros() }
    }

    pub fn to_vec(&self) -> Vec<T> {
        vec![self.v[0], self.v[1], self.p_tilde.x, self.p_tilde.y, self.p_tilde.z]
    }

    pub fn from_slice(x: &[T]) -> Result<Self> {
        if x.len() != 5 {
            return Err(Error::DimensionMismatch { expected: 5, got: x.len() });
        }
        Ok(Self { v: [x[0], x[1]], p_tilde: Vec3::new(x[2], x[3], x[4]) })
    }

    /// Whether the tilt lies outside the unit disk and gets clamped.
    pub fn is_clamped(&self) -> bool {
        self.v[0] * self.v[0] + self.v[1] * self.v[1] > T::one()
    }
}

/// Full placement for reduced parameters: `q = (sqrt(1 - |v|^2), v_x, v_y, 0)`
/// and `p = R~ p~`. A tilt outside the unit disk is scaled back onto it.
pub fn reduced_to_pose<T: Real>(x: &ReducedParams<T>) -> WorkpiecePose<T> {
    let [mut vx, mut vy] = x.v;
    let s = vx * vx + vy * vy;
    if s > T::one() {
        let r = s.sqrt();
        vx = vx / r;
        vy = vy / r;
    }
    let w = (T::one() - vx * vx - vy * vy).max(T::zero()).sqrt();
    let quat = [w, vx, vy, T::zero()];
    let p = Mat3::from_quat(quat) * x.p_tilde;
    WorkpiecePose { quat, p }
}

/// Splits `r = R_z(theta) R_xy` with `R_xy` a rotation about an axis in the
/// `xy` plane. When `R_xy` is a half turn the split is not unique and
/// `theta = 0` is chosen.
pub fn decompose_rz_rxy<T: Real>(r: &Rot3<T>) -> (T, Rot3<T>) {
    // With R_z = (c, 0, 0, s) and R_xy = (w, a, b, 0), the product has
    // scalar part c w and z part s w.
    let [qw, _, _, qz] = r.to_quat();
    let theta = if qw * qw + qz * qz > T::epsilon() * T::epsilon() {
        let t = T::lit(2.0) * qz.atan2(qw);
        if t <= -T::PI() {
            t + T::PI() + T::PI()
        } else {
            t
        }
    } else {
        T::zero()
    };
    (theta, Mat3::rot_z(-theta) * *r)
}

/// Applies a placement to every sample of a toolpath.
pub fn transform_toolpath<T: Real>(wp: &WorkpiecePose<T>, tp: &Toolpath<T>) -> Result<TaskPath<T>> {
    let place = wp.to_pose();
    let poses = tp.poses().iter().map(|s| place.compose(s)).collect();
    TaskPath::with_closed(poses, tp.dlambda(), tp.is_closed())
}

/// Optional task-space soft constraint: a quadratic penalty on tool
/// positions below a floor height.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TaskConstraints<T> {
    pub floor_z: Option<T>,
    pub weight: T,
}

impl<T: Real> TaskConstraints<T> {
    fn penalty(&self, path: &TaskPath<T>) -> T {
        match self.floor_z {
            Some(floor) if self.weight > T::zero() => {
                let s: T = path.poses().iter().map(|p| (floor - p.position.z).max(T::zero()).powi(2)).sum();
                self.weight * path.dlambda() * s
            }
            _ => T::zero(),
        }
    }
}

/// Planning settings shared by every objective evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveConfig<T> {
    pub planner: PlannerConfig<T>,
    pub ik: IKConfig<T>,
    pub constraints: TaskConstraints<T>,
}

impl<T: Real> Default for ObjectiveConfig<T> {
    fn default() -> Self {
        Self {
            planner: PlannerConfig { skip_depth: 2, admit_approximate: true, ..PlannerConfig::default() },
            ik: IKConfig::default(),
            constraints: TaskConstraints::default(),
        }
    }
}

/// Breakdown of one objective evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation<T> {
    pub value: T,
    /// Planner metric `C` when feasible.
    pub cost: Option<T>,
    pub rms: Option<T>,
}

/// Objective for a full placement: planner cost `C` plus task penalties, or
/// the infeasibility sentinel plus a reachability residual.
pub fn evaluate_full<T: Real>(
    robot: &RobotModel<T>,
    tp: &Toolpath<T>,
    wp: &WorkpiecePose<T>,
    cfg: &ObjectiveConfig<T>,
) -> Evaluation<T> {
    let Ok(path) = transform_toolpath(wp, tp) else {
        return Evaluation { value: T::infinity(), cost: None, rms: None };
    };
    let base = robot.offsets()[0];
    let reach = robot.reach();
    let excess: T = path.poses().iter().map(|p| ((p.position - base).norm() - reach).max(T::zero())).sum();
    let sentinel = T::lit(INFEASIBLE_COST);
    if excess > T::zero() {
        return Evaluation { value: sentinel + T::one() + excess, cost: None, rms: None };
    }
    match plan_path(robot, &path, &cfg.planner, &cfg.ik) {
        Ok(res) => match res.outcome {
            PlanOutcome::Feasible(jp) => {
                Evaluation { value: jp.cost + cfg.constraints.penalty(&path), cost: Some(jp.cost), rms: Some(jp.rms) }
            }
            PlanOutcome::Infeasible(info) => {
                let kk = T::lit(path.intervals() as f64);
                let empty = res.layer_counts.iter().filter(|&&c| c == 0).count();
                let progress = info.last_reached.map_or(T::zero(), |k| T::lit(k as f64));
                let h = T::lit(empty as f64) / (kk + T::one()) + (kk - progress) / kk * T::lit(0.5);
                Evaluation { value: sentinel + h.min(T::one()), cost: None, rms: None }
            }
        },
        Err(_) => Evaluation { value: sentinel + T::one(), cost: None, rms: None },
    }
}

pub fn objective_full<T: Real>(
    robot: &RobotModel<T>,
    tp: &Toolpath<T>,
    wp: &WorkpiecePose<T>,
    cfg: &ObjectiveConfig<T>,
) -> T {
    evaluate_full(robot, tp, wp, cfg).value
}

/// Objective over the reduced parameters.
pub fn objective<T: Real>(
    robot: &RobotModel<T>,
    tp: &Toolpath<T>,
    x: &ReducedParams<T>,
    cfg: &ObjectiveConfig<T>,
) -> T {
    objective_full(robot, tp, &reduced_to_pose(x), cfg)
}

fn centroid<T: Real>(tp: &Toolpath<T>) -> Vec3<T> {
    let n = T::lit(tp.len() as f64);
    tp.poses().iter().fold(Vec3::zeros(), |a, p| a + p.position) * (T::one() / n)
}

/// A random placement with feasible objective.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleStart<T> {
    pub params: ReducedParams<T>,
    pub value: T,
    pub attempts: usize,
}

/// Samples tilts uniformly on the unit disk and places the toolpath's
/// centroid uniformly in the box `base +/- half_extent`, until the planner
/// finds a feasible path. `half_extent` defaults to the robot's reach.
pub fn random_feasible_start<T: Real, R: Rng>(
    robot: &RobotModel<T>,
    tp: &Toolpath<T>,
    rng: &mut R,
    half_extent: Option<T>,
    max_attempts: usize,
    cfg: &ObjectiveConfig<T>,
) -> Result<FeasibleStart<T>> {
    if max_attempts == 0 {
        return Err(Error::InvalidConfig("max_attempts must be at least 1".into()));
    }
    let b = half_extent.unwrap_or_else(|| robot.reach()).as_f64();
    let base = robot.offsets()[0];
    let c = centroid(tp);
    let mut infeasible = 0;
    for attempt in 1..=max_attempts {
        let r = rng.gen::<f64>().sqrt();
        let a = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let v = [T::lit(r * a.cos()), T::lit(r * a.sin())];
        let center = base + Vec3::new(rng.gen_range(-b..=b), rng.gen_range(-b..=b), rng.gen_range(-b..=b)).cast();
        let tilt = reduced_to_pose(&ReducedParams { v, p_tilde: Vec3::zeros() }).rotation();
        // R~ (p~ + c) = center puts the centroid at `center`.
        let params = ReducedParams { v, p_tilde: tilt.transpose() * center - c };
        let value = objective(robot, tp, &params, cfg);
        if value < T::lit(INFEASIBLE_COST) {
            return Ok(FeasibleStart { params, value, attempts: attempt });
        }
        infeasible += 1;
    }
    Err(Error::NoFeasibleStart { attempts: max_attempts, infeasible })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig<T> {
    pub n_starts: usize,
    pub seed: u64,
    pub max_attempts: usize,
    /// Half-width of the start box; the robot's reach when `None`.
    pub half_extent: Option<T>,
    pub nelder_mead: NelderMeadOptions<T>,
    pub objective: ObjectiveConfig<T>,
}

impl<T: Real> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            n_starts: 4,
            seed: 0,
            max_attempts: 100,
            half_extent: None,
            nelder_mead: NelderMeadOptions::default(),
            objective: ObjectiveConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult<T> {
    pub start_index: usize,
    pub start: ReducedParams<T>,
    pub params: ReducedParams<T>,
    pub pose: WorkpiecePose<T>,
    /// Best-so-far objective value after each evaluation.
    pub history: Vec<T>,
    pub initial_value: T,
    pub final_value: T,
    pub initial_cost: Option<T>,
    pub final_cost: Option<T>,
    pub initial_rms: Option<T>,
    pub final_rms: Option<T>,
    pub feasible: bool,
    /// Whether the final placement stays feasible when approximate IK
    /// solutions are refused.
    pub strict_feasible: bool,
    pub start_attempts: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

/// Runs one local optimization per start and returns the results ordered by
/// final objective value, then start index; the first entry is the best.
pub fn optimize_workpiece_pose<T: Real>(
    robot: &RobotModel<T>,
    tp: &Toolpath<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<Vec<OptResult<T>>> {
    if cfg.n_starts == 0 {
        return Err(Error::InvalidConfig("n_starts must be at least 1".into()));
    }
    let runs: Vec<Result<OptResult<T>>> = (0..cfg.n_starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let start = random_feasible_start(robot, tp, &mut rng, cfg.half_extent, cfg.max_attempts, &cfg.objective)?;
            Ok(run_start(robot, tp, cfg, i, start))
        })
        .collect();
    let mut attempts = 0;
    let mut infeasible = 0;
    let mut out = Vec::new();
    for r in runs {
        match r {
            Ok(o) => out.push(o),
            Err(Error::NoFeasibleStart { attempts: a, infeasible: f }) => {
                attempts += a;
                infeasible += f;
            }
            Err(e) => return Err(e),
        }
    }
    if out.is_empty() {
        return Err(Error::NoFeasibleStart { attempts, infeasible });
    }
    out.sort_by(|a, b| {
        a.final_value
            .partial_cmp(&b.final_value)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.start_index.cmp(&b.start_index))
    });
    Ok(out)
}

fn run_start<T: Real>(
    robot: &RobotModel<T>,
    tp: &Toolpath<T>,
    cfg: &OptimizerConfig<T>,
    index: usize,
    start: FeasibleStart<T>,
) -> OptResult<T> {
    let obj = &cfg.objective;
    let first = evaluate_full(robot, tp, &reduced_to_pose(&start.params), obj);
    let nm = nelder_mead(
        |x: &[T]| match ReducedParams::from_slice(x) {
            Ok(p) => objective(robot, tp, &p, obj),
            Err(_) => T::infinity(),
        },
        &start.params.to_vec(),
        &cfg.nelder_mead,
    );
    let params = ReducedParams::from_slice(&nm.x).expect("five parameters");
    let pose = reduced_to_pose(&params);
    let last = evaluate_full(robot, tp, &pose, obj);
    let strict_cfg = ObjectiveConfig {
        planner: PlannerConfig { admit_approximate: false, ..obj.planner.clone() },
        ik: obj.ik.clone(),
        constraints: obj.constraints,
    };
    let strict_feasible = last.cost.is_some() && evaluate_full(robot, tp, &pose, &strict_cfg).cost.is_some();
    OptResult {
        start_index: index,
        start: start.params,
        params,
        pose,
        history: nm.history,
        initial_value: first.value,
        final_value: last.value,
        initial_cost: first.cost,
        final_cost: last.cost,
        initial_rms: first.rms,
        final_rms: last.rms,
        feasible: last.cost.is_some(),
        strict_feasible,
        start_attempts: start.attempts,
        evaluations: nm.evaluations,
        termination: nm.termination,
    }
}
