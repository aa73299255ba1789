//! All-solution inverse kinematics.
//!
//! [`solve_all_ik`] returns every isolated preimage of a target that the
//! configured strategy finds. The generic strategy is multi-start damped
//! least squares over a regular seed grid; arms with recognised structure
//! (a general 3R positioning arm, or such an arm followed by a spherical
//! wrist) are enumerated by a one-dimensional search instead, which is both
//! faster and does not depend on seed density. All strategies feed the same
//! polishing, classification and deduplication step, so callers see one
//! contract.

mod multistart;
mod search;
pub mod subproblems;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::{wrap_angle, wrapped_distance, Pose, RobotModel};
use crate::linalg::MAX_DIM;
use crate::num::Real;

pub use search::Structure;

/// Enumeration strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IkMethod {
    /// Structured one-dimensional search when the arm admits it, multi-start otherwise.
    #[default]
    Auto,
    /// Multi-start damped least squares from the seed grid, regardless of structure.
    MultiStart,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IKConfig<T> {
    /// Seeds per joint for the multi-start grid; `None` picks 24 for 3R and 8 for 6R.
    pub seeds_per_joint: Option<usize>,
    pub exact_tol: T,
    pub approx_tol: T,
    /// Wrap-aware max-norm distance below which two solutions are the same.
    pub dedup_tol: T,
    pub max_refine_iters: usize,
    pub damping: T,
    pub include_approximate: bool,
    /// Extra passes over a randomly jittered copy of the seed grid.
    pub jitter_repeats: usize,
    pub jitter_seed: u64,
    pub method: IkMethod,
    /// Grid resolution of the structured search variable.
    pub search_samples: usize,
}

impl<T: Real> Default for IKConfig<T> {
    fn default() -> Self {
        Self {
            seeds_per_joint: None,
            exact_tol: T::tol(1e-8),
            approx_tol: T::tol(1e-3),
            dedup_tol: T::tol(1e-4),
            max_refine_iters: 100,
            damping: T::lit(1e-4),
            include_approximate: true,
            jitter_repeats: 0,
            jitter_seed: 0,
            method: IkMethod::Auto,
            search_samples: 180,
        }
    }
}

impl<T: Real> IKConfig<T> {
    pub fn multistart() -> Self {
        Self { method: IkMethod::MultiStart, ..Self::default() }
    }

    pub fn seeds_for(&self, dof: usize) -> usize {
        self.seeds_per_joint.unwrap_or(if dof <= 3 { 24 } else { 8 })
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [self.exact_tol, self.approx_tol, self.dedup_tol, self.damping];
        if !pos.iter().all(|&v| v > T::zero() && v.is_finite()) {
            return Err(Error::InvalidConfig("IK tolerances and damping must be positive".into()));
        }
        if !(self.exact_tol < self.approx_tol) {
            return Err(Error::InvalidConfig("exact_tol must be below approx_tol".into()));
        }
        if self.seeds_per_joint == Some(0) || self.max_refine_iters == 0 || self.search_samples < 8 {
            return Err(Error::InvalidConfig("seed and iteration counts must be positive".into()));
        }
        Ok(())
    }
}

/// One preimage of a target pose.
#[derive(Debug, Clone, PartialEq)]
pub struct IKSolution<T> {
    /// Joint angles, each in `(-pi, pi]`.
    pub q: Vec<T>,
    /// Position error in meters plus orientation error in radians.
    pub residual: T,
    pub det_j: T,
    /// Set for continuous approximate solutions at workspace boundaries.
    pub approximate: bool,
}

/// All solutions found for one target.
#[derive(Debug, Clone, PartialEq)]
pub struct IKSolutionSet<T> {
    pub pose: Pose<T>,
    pub solutions: Vec<IKSolution<T>>,
}

impl<T: Real> IKSolutionSet<T> {
    pub fn count(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn exact(&self) -> impl Iterator<Item = &IKSolution<T>> {
        self.solutions.iter().filter(|s| !s.approximate)
    }

    pub fn exact_count(&self) -> usize {
        self.exact().count()
    }
}

/// Task error vector (`[dp; dw]` for 6R, `dp` for 3R) and its residual.
fn task_error<T: Real>(robot: &RobotModel<T>, current: &Pose<T>, target: &Pose<T>) -> ([T; MAX_DIM], T) {
    let mut e = [T::zero(); MAX_DIM];
    let dp = target.position - current.position;
    e[0] = dp.x;
    e[1] = dp.y;
    e[2] = dp.z;
    let mut res = dp.norm();
    if robot.task_dim() == 6 {
        let dw = (target.rotation * current.rotation.transpose()).log();
        e[3] = dw.x;
        e[4] = dw.y;
        e[5] = dw.z;
        res = res + dw.norm();
    }
    (e, res)
}

/// Residual of configuration `q` against `target`: position error plus, for
/// 6R arms, geodesic orientation error.
pub fn pose_residual<T: Real>(robot: &RobotModel<T>, q: &[T], target: &Pose<T>) -> Result<T> {
    if q.len() != robot.dof() {
        return Err(Error::DimensionMismatch { expected: robot.dof(), got: q.len() });
    }
    Ok(task_error(robot, &robot.pose_unchecked(q), target).1)
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Levenberg-Marquardt style damped least squares from `q0`.
///
/// Returns an exact solution when the residual drops to `exact_tol`, an
/// approximate one when the iteration stalls at a local minimum of the error
/// with residual at most `approx_tol`, and `None` otherwise.
pub fn refine_solution<T: Real>(
    robot: &RobotModel<T>,
    target: &Pose<T>,
    q0: &[T],
    cfg: &IKConfig<T>,
) -> Result<Option<IKSolution<T>>> {
    if q0.len() != robot.dof() {
        return Err(Error::DimensionMismatch { expected: robot.dof(), got: q0.len() });
    }
    Ok(refine_unchecked(robot, target, q0, cfg))
}

pub(crate) fn refine_unchecked<T: Real>(
    robot: &RobotModel<T>,
    target: &Pose<T>,
    q0: &[T],
    cfg: &IKConfig<T>,
) -> Option<IKSolution<T>> {
    let n = robot.dof();
    let m = robot.task_dim();
    let mut q = [T::zero(); MAX_DIM];
    q[..n].copy_from_slice(q0);
    if !q[..n].iter().all(|v| v.is_finite()) {
        return None;
    }
    let (pose, mut jac) = robot.pose_and_jacobian(&q[..n]);
    let (mut e, mut res) = task_error(robot, &pose, target);
    let mut enorm = norm(&e[..m]);
    let mut lambda = cfg.damping;
    let lambda_max = T::lit(1e8);
    let mut stalled = false;

    for _ in 0..cfg.max_refine_iters {
        if res <= cfg.exact_tol {
            break;
        }
        let mut a = jac * jac.transpose();
        for i in 0..m {
            a[(i, i)] = a[(i, i)] + lambda * lambda;
        }
        let Some(y) = a.solve(&e[..m]) else {
            lambda = lambda * T::lit(10.0);
            if lambda > lambda_max {
                stalled = true;
                break;
            }
            continue;
        };
        let dq = jac.transpose().mul_vec(&y[..m]);
        let mut qn = q;
        for i in 0..n {
            qn[i] = q[i] + dq[i];
        }
        let (pn, jn) = robot.pose_and_jacobian(&qn[..n]);
        let (en, rn) = task_error(robot, &pn, target);
        let nn = norm(&en[..m]);
        if nn < enorm {
            let step = norm(&dq[..n]);
            q = qn;
            jac = jn;
            e = en;
            res = rn;
            enorm = nn;
            lambda = (lambda * T::lit(0.3)).max(cfg.damping);
            if step <= T::epsilon() * T::lit(16.0) * (T::one() + norm(&q[..n])) {
                stalled = true;
                break;
            }
        } else {
            lambda = lambda * T::lit(10.0);
            if lambda > lambda_max {
                stalled = true;
                break;
            }
        }
    }

    let exact = res <= cfg.exact_tol;
    if !exact {
        if res > cfg.approx_tol {
            return None;
        }
        // First-order stationarity: the error is orthogonal to the range of J.
        let g = jac.transpose().mul_vec(&e[..m]);
        let stationary = norm(&g[..n]) <= T::tol(1e-6) * jac.max_abs().max(T::one()) * enorm;
        if !(stalled || stationary) {
            return None;
        }
    }
    let qw: Vec<T> = q[..n].iter().map(|&v| wrap_angle(v)).collect();
    let det_j = robot.pose_and_jacobian(&qw).1.det();
    Some(IKSolution { q: qw, residual: res, det_j, approximate: !exact })
}

/// Enumerates every isolated IK solution of `target` reachable by the
/// configured strategy. Deterministic for fixed inputs; solutions are sorted
/// lexicographically by joint vector.
pub fn solve_all_ik<T: Real>(robot: &RobotModel<T>, target: &Pose<T>, cfg: &IKConfig<T>) -> Result<IKSolutionSet<T>> {
    cfg.validate()?;
    if !target.is_finite() {
        return Err(Error::NonFinite("target pose"));
    }
    let structure = match cfg.method {
        IkMethod::Auto => Structure::detect(robot),
        IkMethod::MultiStart => Structure::Generic,
    };
    let candidates = match &structure {
        Structure::Generic => multistart::candidates(robot, target, cfg),
        s => {
            let seeds = s.candidates(robot, target, cfg);
            polish(robot, target, &seeds, cfg)
        }
    };
    Ok(IKSolutionSet { pose: *target, solutions: assemble(candidates, cfg) })
}

fn polish<T: Real>(robot: &RobotModel<T>, target: &Pose<T>, seeds: &[Vec<T>], cfg: &IKConfig<T>) -> Vec<IKSolution<T>> {
    seeds.par_iter().filter_map(|q| refine_unchecked(robot, target, q, cfg)).collect()
}

/// Filters, deduplicates and orders raw refinement results.
fn assemble<T: Real>(mut raw: Vec<IKSolution<T>>, cfg: &IKConfig<T>) -> Vec<IKSolution<T>> {
    raw.retain(|s| cfg.include_approximate || !s.approximate);
    // Exact before approximate, lower residual first, then by joint values.
    raw.sort_by(|a, b| {
        a.approximate
            .cmp(&b.approximate)
            .then(a.residual.partial_cmp(&b.residual).unwrap_or(std::cmp::Ordering::Equal))
            .then_with(|| lex_cmp(&a.q, &b.q))
    });
    let mut kept: Vec<IKSolution<T>> = Vec::new();
    for s in raw {
        if kept.iter().all(|k| wrapped_distance(&k.q, &s.q) > cfg.dedup_tol) {
            kept.push(s);
        }
    }
    kept.sort_by(|a, b| lex_cmp(&a.q, &b.q));
    kept
}

/// Exact solution counts for positions `(rho, 0, z)` at the centers of an
/// `n_rho x n_z` grid of cells covering the given ranges, indexed `[i_rho][i_z]`.
pub fn solution_count_map<T: Real>(
    robot: &RobotModel<T>,
    rho: (T, T),
    z: (T, T),
    grid: (usize, usize),
    cfg: &IKConfig<T>,
) -> Result<Vec<Vec<usize>>> {
    if robot.dof() != 3 {
        return Err(Error::RequiresThreeDof);
    }
    if grid.0 == 0 || grid.1 == 0 {
        return Err(Error::InvalidConfig("grid dimensions must be positive".into()));
    }
    let center = |(a, b): (T, T), n: usize, i: usize| a + (b - a) * (T::lit(i as f64) + T::lit(0.5)) / T::lit(n as f64);
    (0..grid.0)
        .into_par_iter()
        .map(|i| {
            let r = center(rho, grid.0, i);
            (0..grid.1)
                .map(|j| {
                    let target = Pose::from_position(crate::linalg::Vec3::new(r, T::zero(), center(z, grid.1, j)));
                    Ok(solve_all_ik(robot, &target, cfg)?.exact_count())
                })
                .collect()
        })
        .collect()
}

pub(crate) fn lex_cmp<T: Real>(a: &[T], b: &[T]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}
