//! Kinematics, all-solution inverse kinematics, cuspidality identification,
//! graph-based joint path planning and workpiece placement optimization for
//! 3R and 6R serial arms.
//!
//! Every numeric routine is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix `f64`.

pub mod cuspidality;
pub mod error;
pub mod ik;
pub mod io;
pub mod kinematics;
pub mod linalg;
pub mod num;
pub mod planner;
pub mod scenarios;
pub mod workpiece;

pub use cuspidality::{identify_cuspidal, nonsingular_pair_check, Verdict, Witness};
pub use error::{Error, Result};
pub use ik::{refine_solution, solution_count_map, solve_all_ik, IKConfig, IKSolution, IKSolutionSet};
pub use kinematics::{
    forward_kinematics, jacobian, jacobian_determinant, manipulability, to_cylindrical, wrap_to_pi, CylindricalPoint,
    Pose, RobotModel,
};
pub use linalg::{Mat, Mat3, Rot3, Vec3};
pub use num::Real;
pub use planner::{
    analyze_repeatability, build_layers, build_plan_graph, edge_cost, plan_path, shortest_joint_path, JointPath, Layer,
    PlanGraph, PlanResult, PlannerConfig, RepeatabilityReport, TaskPath,
};
pub use workpiece::{
    decompose_rz_rxy, nelder_mead, objective, optimize_workpiece_pose, random_feasible_start, reduced_to_pose,
    transform_toolpath, OptResult, ReducedParams, Toolpath, WorkpiecePose,
};

pub type Robot = RobotModel<f64>;
pub type Robot32 = RobotModel<f32>;
pub type Pose64 = Pose<f64>;
pub type Path64 = TaskPath<f64>;
pub type Config = IKConfig<f64>;
pub type Planner = PlannerConfig<f64>;
