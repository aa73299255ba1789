//! Built-in robots, witness configurations and task-path fixtures.

use crate::error::{Error, Result};
use crate::kinematics::{Pose, RobotModel};
use crate::linalg::{Mat3, Vec3};
use crate::num::Real;
use crate::planner::TaskPath;

fn v<T: Real>(x: f64, y: f64, z: f64) -> Vec3<T> {
    Vec3::new(T::lit(x), T::lit(y), T::lit(z))
}

/// The classic cuspidal 3R arm: `h1 = h3 = e_z`, `h2 = e_y`,
/// `p12 = e_x`, `p23 = 2 e_x + e_y`, `p3T = 1.5 e_x`.
pub fn canonical_3r<T: Real>() -> RobotModel<T> {
    RobotModel::new(
        "3r-canonical",
        vec![Vec3::ez(), Vec3::ey(), Vec3::ez()],
        vec![Vec3::zeros(), v(1.0, 0.0, 0.0), v(2.0, 1.0, 0.0)],
        v(1.5, 0.0, 0.0),
    )
    .expect("valid built-in robot")
}

/// Noncuspidal elbow arm whose position IK reduces to quadratics.
pub fn elbow_3r<T: Real>() -> RobotModel<T> {
    RobotModel::new(
        "3r-elbow",
        vec![Vec3::ez(), Vec3::ey(), Vec3::ey()],
        vec![Vec3::zeros(), Vec3::ez(), Vec3::ex()],
        Vec3::ex(),
    )
    .expect("valid built-in robot")
}

/// 6R arm with joints 2, 3 and 4 parallel that admits a nonsingular change
/// of solution. The wrist link is `p56 = 0.3 e_x + 0.9 e_z`: among the
/// candidate wrist offsets it is the only one under which the witness pair
/// below reaches a common pose (to 8e-5 m).
pub fn three_parallel_cuspidal<T: Real>() -> RobotModel<T> {
    RobotModel::new(
        "3parallel-cuspidal",
        vec![Vec3::ez(), Vec3::ey(), Vec3::ey(), Vec3::ey(), Vec3::ex(), Vec3::ey()],
        vec![Vec3::zeros(), v(0.1, 0.7, 0.0), v(0.0, 0.0, 0.7), v(0.0, 0.0, 0.7), v(0.0, 0.0, 0.7), v(0.3, 0.0, 0.9)],
        v(0.0, 0.5, 0.0),
    )
    .expect("valid built-in robot")
}

/// Witness configurations `(q_A, q_B)` for [`three_parallel_cuspidal`].
/// `q_B` is given to four decimals.
pub fn three_parallel_witness<T: Real>() -> ([T; 6], [T; 6]) {
    let a = [-2.4, -0.9, 1.1, -0.8, 2.3, -1.3];
    let b = [0.9940, -1.4391, 0.9530, 1.2368, 1.0004, 1.5942];
    (a.map(T::lit), b.map(T::lit))
}

/// Witness pair reported for the ABB GoFa 5 kg. Data only: the vendor
/// kinematic parameters needed to check it are not available.
pub fn gofa_witness<T: Real>() -> ([T; 6], [T; 6]) {
    let a = [-0.8000, 0.5900, 2.3400, 2.7200, 1.0600, -1.8400];
    let b = [2.2599, 2.1999, 2.6677, 2.5298, -2.5286, 0.4831];
    (a.map(T::lit), b.map(T::lit))
}

/// Canonical cuspidal 3R arm carrying a spherical wrist (axes `e_x, e_y, e_x`
/// meeting at the former tool point) and a 0.2 m tool flange. Cuspidal
/// because its positioning arm is.
pub fn wrist_6r<T: Real>() -> RobotModel<T> {
    RobotModel::new(
        "6r-cuspidal-wrist",
        vec![Vec3::ez(), Vec3::ey(), Vec3::ez(), Vec3::ex(), Vec3::ey(), Vec3::ex()],
        vec![Vec3::zeros(), v(1.0, 0.0, 0.0), v(2.0, 1.0, 0.0), v(1.5, 0.0, 0.0), Vec3::zeros(), Vec3::zeros()],
        v(0.2, 0.0, 0.0),
    )
    .expect("valid built-in robot")
}

/// Names accepted by [`robot_by_name`].
pub const ROBOT_NAMES: &[&str] = &["3r-canonical", "3r-elbow", "3parallel-cuspidal", "6r-cuspidal-wrist"];

pub fn robot_by_name<T: Real>(name: &str) -> Option<RobotModel<T>> {
    match name {
        "3r-canonical" => Some(canonical_3r()),
        "3r-elbow" => Some(elbow_3r()),
        "3parallel-cuspidal" => Some(three_parallel_cuspidal()),
        "6r-cuspidal-wrist" => Some(wrist_6r()),
        _ => None,
    }
}

/// Straight segment between two positions, `samples` points, fixed identity
/// orientation. `dlambda` is the spacing in meters of path length.
pub fn line_path<T: Real>(a: Vec3<T>, b: Vec3<T>, samples: usize) -> Result<TaskPath<T>> {
    if samples < 2 {
        return Err(Error::InvalidPath("a line needs at least two samples".into()));
    }
    let k = T::lit((samples - 1) as f64);
    let len = (b - a).norm();
    let poses = (0..samples)
        .map(|i| {
            let t = T::lit(i as f64) / k;
            Pose::from_position(a + (b - a) * t)
        })
        .collect();
    let dl = if len > T::zero() { len / k } else { T::one() / k };
    TaskPath::new(poses, dl)
}

/// Closed circle of positions in the `phi = 0` half-plane (the x-z plane),
/// centered at `(rho, 0, z)`. The last sample repeats the first.
pub fn cylindrical_loop<T: Real>(rho: T, z: T, radius: T, samples: usize) -> Result<TaskPath<T>> {
    if samples < 3 {
        return Err(Error::InvalidPath("a loop needs at least three samples".into()));
    }
    let k = samples - 1;
    let two_pi = T::PI() + T::PI();
    let poses: Vec<_> = (0..samples)
        .map(|i| {
            let t = two_pi * T::lit((i % k) as f64) / T::lit(k as f64);
            Pose::from_position(Vec3::new(rho + radius * t.cos(), T::zero(), z + radius * t.sin()))
        })
        .collect();
    TaskPath::new(poses, two_pi * radius / T::lit(k as f64))
}

/// How a helix's tool orientation evolves along the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HelixOrientation {
    /// Identity orientation at every sample.
    Fixed,
    /// Tool x-axis along the path tangent, z-axis toward the helix axis.
    TangentFollowing,
}

/// Helix `(r cos t, r sin t, pitch t / 2 pi)` for `t` in `[0, 2 pi turns]`,
/// sampled equally in `t` (and therefore in arc length).
pub fn generate_helix<T: Real>(
    radius: T,
    pitch: T,
    turns: T,
    samples: usize,
    orientation: HelixOrientation,
) -> Result<TaskPath<T>> {
    if samples < 2 {
        return Err(Error::InvalidPath("a helix needs at least two samples".into()));
    }
    if orientation == HelixOrientation::TangentFollowing && !(radius > T::zero()) {
        return Err(Error::InvalidPath("tangent-following orientation needs a positive radius".into()));
    }
    if radius < T::zero() || !(turns > T::zero()) {
        return Err(Error::InvalidPath("helix radius must be nonnegative and turns positive".into()));
    }
    let two_pi = T::PI() + T::PI();
    let t_end = two_pi * turns;
    let k = T::lit((samples - 1) as f64);
    let rise = pitch / two_pi;
    let poses: Vec<_> = (0..samples)
        .map(|i| {
            let t = t_end * T::lit(i as f64) / k;
            let (s, c) = t.sin_cos();
            let p = Vec3::new(radius * c, radius * s, rise * t);
            let rot = match orientation {
                HelixOrientation::Fixed => Mat3::identity(),
                HelixOrientation::TangentFollowing => {
                    let tangent = Vec3::new(-radius * s, radius * c, rise).normalized().unwrap_or_else(Vec3::ez);
                    let inward = Vec3::new(-c, -s, T::zero());
                    let z = (inward - tangent * tangent.dot(inward)).normalized().unwrap_or_else(Vec3::ez);
                    Mat3::from_cols(tangent, z.cross(tangent), z)
                }
            };
            Pose::new(rot, p)
        })
        .collect();
    let length = t_end * (radius * radius + rise * rise).sqrt();
    let dl = if length > T::zero() { length / k } else { T::one() / k };
    TaskPath::new(poses, dl)
}

/// Default in-repo helix toolpath: radius 0.3 m, pitch 0.2 m, two turns,
/// 500 samples, fixed orientation.
pub fn default_helix<T: Real>() -> TaskPath<T> {
    generate_helix(T::lit(0.3), T::lit(0.2), T::lit(2.0), 500, HelixOrientation::Fixed).expect("valid helix")
}

/// Straight segment at `z = 0.2` across the four-solution region of
/// [`canonical_3r`], below its left cusp. Every sample has IK solutions but
/// no continuous joint path follows it from any start solution.
pub fn infeasible_line<T: Real>() -> TaskPath<T> {
    line_path(v(1.3, 0.0, 0.2), v(3.2, 0.0, 0.2), 100).expect("valid fixture")
}

/// [`infeasible_line`] translated by `+1 e_z`, above the cusp; feasible.
pub fn control_line<T: Real>() -> TaskPath<T> {
    line_path(v(1.3, 0.0, 1.2), v(3.2, 0.0, 1.2), 100).expect("valid fixture")
}

/// Closed loop around the left cusp of [`canonical_3r`]'s four-solution
/// region, starting inside that region.
pub fn cusp_loop<T: Real>() -> TaskPath<T> {
    cylindrical_loop(T::lit(1.45), T::lit(0.45), T::lit(0.3), 200).expect("valid fixture")
}

/// Closed loop inside [`canonical_3r`]'s two-solution region.
pub fn regular_loop<T: Real>() -> TaskPath<T> {
    cylindrical_loop(T::lit(3.5), T::lit(1.0), T::lit(0.3), 200).expect("valid fixture")
}

/// Names accepted by [`path_by_name`].
pub const PATH_NAMES: &[&str] = &["3r-infeasible-line", "3r-control-line", "3r-cusp-loop", "3r-regular-loop", "helix"];

/// Built-in path and whether it is expressed in the workpiece frame.
pub fn path_by_name<T: Real>(name: &str) -> Option<(TaskPath<T>, bool)> {
    match name {
        "3r-infeasible-line" => Some((infeasible_line(), false)),
        "3r-control-line" => Some((control_line(), false)),
        "3r-cusp-loop" => Some((cusp_loop(), false)),
        "3r-regular-loop" => Some((regular_loop(), false)),
        "helix" => Some((default_helix(), true)),
        _ => None,
    }
}
