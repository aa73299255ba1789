//! Optimal joint-space paths for discretized task-space paths.
//!
//! Every sample of a [`TaskPath`] is solved for all IK solutions; the
//! solutions become vertices of a layered DAG whose edges join solutions of
//! consecutive samples that are close enough to be traversed at bounded
//! joint speed. The minimum-weight path from the start to the finish vertex
//! is the optimal joint path under the discrete squared-velocity metric.

mod graph;
mod repeat;
mod search;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ik::{solve_all_ik, IKConfig, IKSolutionSet};
use crate::kinematics::{wrap_angle, Pose, RobotModel};
use crate::linalg::Mat;
use crate::num::Real;

pub use graph::{build_plan_graph, Edge, Node, PlanGraph, Vertex};
pub use repeat::{analyze_repeatability, RepeatabilityReport};
pub use search::{path_cost, shortest_joint_path, shortest_path_between};

/// Equally spaced samples `lambda_k = k * dlambda`, `k = 0..=K`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskPath<T> {
    poses: Vec<Pose<T>>,
    dlambda: T,
    closed: bool,
}

const CLOSED_TOL: f64 = 1e-9;

impl<T: Real> TaskPath<T> {
    /// Builds a path; it is marked closed when the first and last poses agree.
    pub fn new(poses: Vec<Pose<T>>, dlambda: T) -> Result<Self> {
        if poses.len() < 2 {
            return Err(Error::InvalidPath(format!("need at least two samples, got {}", poses.len())));
        }
        if !(dlambda > T::zero()) || !dlambda.is_finite() {
            return Err(Error::InvalidPath("dlambda must be positive and finite".into()));
        }
        if let Some(k) = poses.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidPath(format!("sample {k} is not finite")));
        }
        let (dp, dr) = poses[0].error_to(&poses[poses.len() - 1]);
        let tol = T::tol(CLOSED_TOL);
        let closed = dp <= tol && dr <= tol;
        Ok(Self { poses, dlambda, closed })
    }

    /// Like [`TaskPath::new`] but with an explicit closed flag, checked
    /// against the end poses when set.
    pub fn with_closed(poses: Vec<Pose<T>>, dlambda: T, closed: bool) -> Result<Self> {
        let mut p = Self::new(poses, dlambda)?;
        if closed && !p.closed {
            return Err(Error::InvalidPath("path marked closed but its end poses differ".into()));
        }
        p.closed = closed;
        Ok(p)
    }

    pub fn poses(&self) -> &[Pose<T>] {
        &self.poses
    }

    /// Number of samples, `K + 1`.
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// Number of intervals `K`.
    pub fn intervals(&self) -> usize {
        self.poses.len() - 1
    }

    pub fn dlambda(&self) -> T {
        self.dlambda
    }

    pub fn lambda(&self, k: usize) -> T {
        T::lit(k as f64) * self.dlambda
    }

    /// Total path parameter length `L = K * dlambda`.
    pub fn length(&self) -> T {
        self.lambda(self.intervals())
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }
}

/// IK solutions of one path sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    pub k: usize,
    pub solutions: IKSolutionSet<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig<T> {
    /// Edge admission threshold per unit lambda; `None` derives it from
    /// `qdot_max` as `dof * qdot_max^2`.
    pub eps0: Option<T>,
    /// Per-joint speed bound in rad per unit lambda.
    pub qdot_max: T,
    pub skip_depth: usize,
    /// Never join solutions whose Jacobian determinants differ in sign.
    pub nonsingular_only: bool,
    pub manipulability_weight: T,
    /// Weight matrix for the manipulability measure; identity when `None`.
    pub manipulability_matrix: Option<Mat<T>>,
    pub joint_limit_barrier: T,
    pub enforce_joint_limits: bool,
    pub admit_approximate: bool,
    /// Scale applied to an approximate solution's residual in edge weights.
    pub approximate_weight: T,
}

impl<T: Real> Default for PlannerConfig<T> {
    fn default() -> Self {
        Self {
            eps0: None,
            qdot_max: T::lit(4.0) * T::PI(),
            skip_depth: 2,
            nonsingular_only: false,
            manipulability_weight: T::zero(),
            manipulability_matrix: None,
            joint_limit_barrier: T::zero(),
            enforce_joint_limits: false,
            admit_approximate: true,
            approximate_weight: T::lit(1e3),
        }
    }
}

impl<T: Real> PlannerConfig<T> {
    pub fn eps0_for(&self, dof: usize) -> T {
        self.eps0.unwrap_or_else(|| T::lit(dof as f64) * self.qdot_max * self.qdot_max)
    }

    pub fn validate(&self, dof: usize) -> Result<()> {
        let eps0 = self.eps0_for(dof);
        if !(eps0 > T::zero()) || !eps0.is_finite() {
            return Err(Error::InvalidConfig("eps0 must be positive".into()));
        }
        if self.skip_depth == 0 {
            return Err(Error::InvalidConfig("skip_depth must be at least 1".into()));
        }
        let nonneg = [self.manipulability_weight, self.joint_limit_barrier, self.approximate_weight];
        if !nonneg.iter().all(|&v| v >= T::zero() && v.is_finite()) {
            return Err(Error::InvalidConfig("penalty weights must be nonnegative".into()));
        }
        if let Some(w) = &self.manipulability_matrix {
            if !w.is_symmetric_positive_definite() {
                return Err(Error::NotPositiveDefinite { n: w.rows() });
            }
        }
        Ok(())
    }
}

/// Discrete squared joint speed between two samples: `|wrap(q2 - q1)|^2 / dlambda`.
pub fn edge_cost<T: Real>(q1: &[T], q2: &[T], dlambda: T) -> T {
    q1.iter().zip(q2).map(|(&a, &b)| wrap_angle(b - a).powi(2)).sum::<T>() / dlambda
}

/// Solves every sample of `path`; approximate solutions are kept and flagged.
pub fn build_layers<T: Real>(robot: &RobotModel<T>, path: &TaskPath<T>, cfg: &IKConfig<T>) -> Result<Vec<Layer<T>>> {
    path.poses()
        .par_iter()
        .enumerate()
        .map(|(k, pose)| Ok(Layer { k, solutions: solve_all_ik(robot, pose, cfg)? }))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointPathEntry<T> {
    pub k: usize,
    pub lambda: T,
    /// Index of the solution within its layer.
    pub solution: usize,
    /// Unwrapped joint values, continuous along the path.
    pub q: Vec<T>,
    pub det_j: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointPath<T> {
    pub entries: Vec<JointPathEntry<T>>,
    /// Sum of edge metric costs.
    pub cost: T,
    /// Cost plus vertex penalties, the quantity that was minimized.
    pub total_weight: T,
    /// `sqrt(cost / L)`.
    pub rms: T,
}

/// Where the search ran out of reachable vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Infeasibility {
    /// Last layer holding a vertex reachable from the start, if any.
    pub last_reached: Option<usize>,
    /// First layer with no vertex reachable from the start, if any.
    pub first_unreached: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlanOutcome<T> {
    Feasible(JointPath<T>),
    Infeasible(Infeasibility),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult<T> {
    pub outcome: PlanOutcome<T>,
    pub layer_counts: Vec<usize>,
    pub exact_layer_counts: Vec<usize>,
    pub vertex_count: usize,
    pub edge_count: usize,
}

impl<T: Real> PlanResult<T> {
    pub fn path(&self) -> Option<&JointPath<T>> {
        match &self.outcome {
            PlanOutcome::Feasible(p) => Some(p),
            PlanOutcome::Infeasible(_) => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.path().is_some()
    }
}

pub fn plan_path<T: Real>(
    robot: &RobotModel<T>,
    path: &TaskPath<T>,
    cfg: &PlannerConfig<T>,
    ik_cfg: &IKConfig<T>,
) -> Result<PlanResult<T>> {
    cfg.validate(robot.dof())?;
    let layers = build_layers(robot, path, ik_cfg)?;
    plan_from_layers(robot, &layers, path, cfg)
}

/// Graph construction and search over precomputed layers.
pub fn plan_from_layers<T: Real>(
    robot: &RobotModel<T>,
    layers: &[Layer<T>],
    path: &TaskPath<T>,
    cfg: &PlannerConfig<T>,
) -> Result<PlanResult<T>> {
    let graph = build_plan_graph(robot, layers, path, cfg)?;
    let outcome = match shortest_joint_path(&graph) {
        Some(p) => PlanOutcome::Feasible(p),
        None => PlanOutcome::Infeasible(graph.infeasibility()),
    };
    Ok(PlanResult {
        outcome,
        layer_counts: layers.iter().map(|l| l.solutions.count()).collect(),
        exact_layer_counts: layers.iter().map(|l| l.solutions.exact_count()).collect(),
        vertex_count: graph.vertices().len(),
        edge_count: graph.edges().len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vec3;

    #[test]
    fn edge_cost_examples() {
        assert_eq!(edge_cost(&[0.3, 0.1, 2.0], &[0.3, 0.1, 2.0], 0.5), 0.0);
        assert!((edge_cost::<f64>(&[0.0, 0.0, 0.0], &[0.1, 0.0, 0.0], 0.01) - 1.0).abs() < 1e-12);
        let two_pi = 2.0 * std::f64::consts::PI;
        assert!((edge_cost(&[0.0], &[two_pi - 0.2], 0.1) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn task_path_validation() {
        let p = Pose::<f64>::from_position(Vec3::new(1.0, 2.0, 3.0));
        assert!(TaskPath::new(vec![p], 0.1).is_err());
        assert!(TaskPath::new(vec![p, p], 0.0).is_err());
        let t = TaskPath::new(vec![p; 4], 0.25).unwrap();
        assert!(t.is_closed());
        assert_eq!(t.intervals(), 3);
        assert!((t.length() - 0.75).abs() < 1e-15);
        let q = Pose::from_position(Vec3::new(1.0, 2.0, 4.0));
        assert!(!TaskPath::new(vec![p, q], 1.0).unwrap().is_closed());
        assert!(TaskPath::with_closed(vec![p, q], 1.0, true).is_err());
    }

    #[test]
    fn default_threshold_follows_speed_bound() {
        let c = PlannerConfig::<f64>::default();
        let w = 4.0 * std::f64::consts::PI;
        assert!((c.eps0_for(3) - 3.0 * w * w).abs() < 1e-9);
        assert!(PlannerConfig::<f64> { skip_depth: 0, ..c }.validate(3).is_err());
    }
}
