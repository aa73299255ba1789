//! Product-of-exponentials kinematics for 3R and 6R serial arms.
//!
//! A robot is described by its joint axes `h_i` (each expressed in the
//! preceding link frame), the link offsets `p_{i-1,i}` and the tool offset
//! `p_{n,T}`. At zero configuration every link frame is aligned with the base.

use crate::error::{Error, Result};
use crate::linalg::{Mat, Mat3, Rot3, Vec3, MAX_DIM};
use crate::num::Real;

/// Rigid pose of a frame: rotation plus position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose<T> {
    pub rotation: Rot3<T>,
    pub position: Vec3<T>,
}

impl<T: Real> Pose<T> {
    pub fn new(rotation: Rot3<T>, position: Vec3<T>) -> Self {
        Self { rotation, position }
    }

    pub fn identity() -> Self {
        Self::new(Mat3::identity(), Vec3::zeros())
    }

    pub fn from_position(position: Vec3<T>) -> Self {
        Self::new(Mat3::identity(), position)
    }

    /// `self * other`: express `other` (given in this frame) in the parent frame.
    pub fn compose(&self, other: &Self) -> Self {
        Self::new(self.rotation * other.rotation, self.position + self.rotation * other.position)
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(rt, -(rt * self.position))
    }

    pub fn transform_point(&self, p: Vec3<T>) -> Vec3<T> {
        self.position + self.rotation * p
    }

    /// Position error in meters and orientation error as a geodesic angle.
    pub fn error_to(&self, other: &Self) -> (T, T) {
        ((self.position - other.position).norm(), self.rotation.angle_to(&other.rotation))
    }

    pub fn is_finite(&self) -> bool {
        self.rotation.is_finite() && self.position.is_finite()
    }

    pub fn cast<U: Real>(&self) -> Pose<U> {
        Pose::new(self.rotation.cast(), self.position.cast())
    }
}

/// Position in cylindrical coordinates about the base z-axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylindricalPoint<T> {
    pub rho: T,
    pub phi: T,
    pub z: T,
}

/// Serial revolute arm in product-of-exponentials form.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel<T> {
    name: String,
    axes: Vec<Vec3<T>>,
    offsets: Vec<Vec3<T>>,
    tool: Vec3<T>,
    limits: Option<Vec<(T, T)>>,
}

impl<T: Real> RobotModel<T> {
    /// `offsets` holds `p_{01}, p_{12}, ..., p_{n-1,n}`; `tool` is `p_{nT}`.
    /// Axes are normalized on construction.
    pub fn new(name: impl Into<String>, axes: Vec<Vec3<T>>, offsets: Vec<Vec3<T>>, tool: Vec3<T>) -> Result<Self> {
        let n = axes.len();
        if n != 3 && n != 6 {
            return Err(Error::UnsupportedDof(n));
        }
        if offsets.len() != n {
            return Err(Error::OffsetCount { expected: n, got: offsets.len() });
        }
        if !offsets.iter().all(|p| p.is_finite()) || !tool.is_finite() {
            return Err(Error::NonFinite("link offsets"));
        }
        let axes = axes
            .into_iter()
            .enumerate()
            // Already-unit axes are kept bit for bit so saved models reload unchanged.
            .map(|(i, h)| {
                if (h.norm() - T::one()).abs() <= T::lit(4.0) * T::epsilon() {
                    Ok(h)
                } else {
                    h.normalized().ok_or(Error::ZeroAxis(i))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { name: name.into(), axes, offsets, tool, limits: None })
    }

    /// Attaches joint limits in radians; ranges wider than `2 pi` encode
    /// multi-turn joints.
    pub fn with_limits(mut self, limits: Vec<(T, T)>) -> Result<Self> {
        if limits.len() != self.dof() {
            return Err(Error::DimensionMismatch { expected: self.dof(), got: limits.len() });
        }
        for (i, &(lo, hi)) in limits.iter().enumerate() {
            if !(lo < hi) {
                return Err(Error::InvalidLimits(i));
            }
        }
        self.limits = Some(limits);
        Ok(self)
    }

    pub fn without_limits(mut self) -> Self {
        self.limits = None;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dof(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec3<T>] {
        &self.axes
    }

    pub fn offsets(&self) -> &[Vec3<T>] {
        &self.offsets
    }

    pub fn tool(&self) -> Vec3<T> {
        self.tool
    }

    pub fn limits(&self) -> Option<&[(T, T)]> {
        self.limits.as_deref()
    }

    /// Task-space dimension: 3 (position) for 3R arms, 6 for 6R arms.
    pub fn task_dim(&self) -> usize {
        if self.dof() == 3 {
            3
        } else {
            6
        }
    }

    /// Sum of link and tool offset lengths after the first joint: an upper
    /// bound on the distance from the first joint origin to the tool point.
    pub fn reach(&self) -> T {
        self.offsets.iter().skip(1).map(|p| p.norm()).sum::<T>() + self.tool.norm()
    }

    pub fn cast<U: Real>(&self) -> RobotModel<U> {
        RobotModel {
            name: self.name.clone(),
            axes: self.axes.iter().map(|h| h.cast()).collect(),
            offsets: self.offsets.iter().map(|p| p.cast()).collect(),
            tool: self.tool.cast(),
            limits: self
                .limits
                .as_ref()
                .map(|l| l.iter().map(|&(a, b)| (U::lit(a.as_f64()), U::lit(b.as_f64()))).collect()),
        }
    }

    fn check_len(&self, q: &[T]) -> Result<()> {
        if q.len() != self.dof() {
            return Err(Error::DimensionMismatch { expected: self.dof(), got: q.len() });
        }
        Ok(())
    }

    /// Walks the chain once, returning the tool pose together with each
    /// joint's world-frame axis and origin.
    pub(crate) fn chain(&self, q: &[T]) -> (Pose<T>, [Vec3<T>; MAX_DIM], [Vec3<T>; MAX_DIM]) {
        let mut r = Mat3::identity();
        let mut p = self.offsets[0];
        let mut axes = [Vec3::zeros(); MAX_DIM];
        let mut origins = [Vec3::zeros(); MAX_DIM];
        let n = self.dof();
        for i in 0..n {
            axes[i] = r * self.axes[i];
            origins[i] = p;
            r = r * Mat3::axis_angle(self.axes[i], q[i]);
            let next = if i + 1 < n { self.offsets[i + 1] } else { self.tool };
            p += r * next;
        }
        (Pose::new(r, p), axes, origins)
    }

    /// Tool pose and Jacobian from a single chain traversal. Dimensions are
    /// assumed checked by the caller.
    pub(crate) fn pose_and_jacobian(&self, q: &[T]) -> (Pose<T>, Mat<T>) {
        let (pose, axes, origins) = self.chain(q);
        let n = self.dof();
        let mut j = Mat::zeros(self.task_dim(), n);
        for i in 0..n {
            let lin = axes[i].cross(pose.position - origins[i]);
            j[(0, i)] = lin.x;
            j[(1, i)] = lin.y;
            j[(2, i)] = lin.z;
            if n == 6 {
                j[(3, i)] = axes[i].x;
                j[(4, i)] = axes[i].y;
                j[(5, i)] = axes[i].z;
            }
        }
        (pose, j)
    }

    pub(crate) fn pose_unchecked(&self, q: &[T]) -> Pose<T> {
        self.chain(q).0
    }
}

/// Tool pose `f(q)`. For 3R arms the rotation is the last link frame's
/// orientation and plays no role in inverse kinematics.
pub fn forward_kinematics<T: Real>(robot: &RobotModel<T>, q: &[T]) -> Result<Pose<T>> {
    robot.check_len(q)?;
    Ok(robot.pose_unchecked(q))
}

/// Jacobian mapping joint rates to tool velocity: the 3x3 position Jacobian
/// for 3R arms, the 6x6 `[linear; angular]` Jacobian for 6R arms.
pub fn jacobian<T: Real>(robot: &RobotModel<T>, q: &[T]) -> Result<Mat<T>> {
    robot.check_len(q)?;
    Ok(robot.pose_and_jacobian(q).1)
}

/// `det J(q)`. Only defined for square Jacobians, which every supported arm has.
pub fn jacobian_determinant<T: Real>(robot: &RobotModel<T>, q: &[T]) -> Result<T> {
    let j = jacobian(robot, q)?;
    Ok(j.det())
}

/// Yoshikawa manipulability `sqrt(det(J W J^T))` with joint-space weight `w`.
pub fn manipulability<T: Real>(robot: &RobotModel<T>, q: &[T], w: &Mat<T>) -> Result<T> {
    let n = robot.dof();
    if w.rows() != n || !w.is_symmetric_positive_definite() {
        return Err(Error::NotPositiveDefinite { n });
    }
    let j = jacobian(robot, q)?;
    Ok(manipulability_of(&j, w))
}

pub(crate) fn manipulability_of<T: Real>(j: &Mat<T>, w: &Mat<T>) -> T {
    let m = *j * *w * j.transpose();
    m.det().max(T::zero()).sqrt()
}

/// Wraps an angle into `(-pi, pi]`.
#[inline]
pub fn wrap_angle<T: Real>(x: T) -> T {
    let pi = T::PI();
    if x > -pi && x <= pi {
        return x;
    }
    let two_pi = pi + pi;
    let mut r = x - two_pi * ((x + pi) / two_pi).floor();
    // r is now nominally in [-pi, pi); clean up rounding at both ends.
    while r <= -pi {
        r = r + two_pi;
    }
    while r > pi {
        r = r - two_pi;
    }
    r
}

/// Element-wise [`wrap_angle`].
pub fn wrap_to_pi<T: Real>(dq: &[T]) -> Vec<T> {
    dq.iter().map(|&x| wrap_angle(x)).collect()
}

/// Max-norm of the wrapped difference between two joint vectors.
pub fn wrapped_distance<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| m.max(wrap_angle(x - y).abs()))
}

pub fn to_cylindrical<T: Real>(p: Vec3<T>) -> CylindricalPoint<T> {
    let rho = (p.x * p.x + p.y * p.y).sqrt();
    let phi = if rho == T::zero() {
        T::zero()
    } else {
        let a = p.y.atan2(p.x);
        if a <= -T::PI() {
            T::PI()
        } else {
            a
        }
    };
    CylindricalPoint { rho, phi, z: p.z }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::canonical_3r;
    use std::f64::consts::PI;

    fn close(a: Vec3<f64>, b: Vec3<f64>, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn canonical_fk_examples() {
        let r = canonical_3r::<f64>();
        let p = |q: [f64; 3]| forward_kinematics(&r, &q).unwrap().position;
        assert!(close(p([0.0, 0.0, 0.0]), Vec3::new(4.5, 1.0, 0.0), 1e-15));
        assert!(close(p([PI / 2.0, 0.0, 0.0]), Vec3::new(-1.0, 4.5, 0.0), 1e-14));
        assert!(close(p([0.0, PI / 2.0, 0.0]), Vec3::new(1.0, 1.0, -3.5), 1e-14));
    }

    #[test]
    fn fk_periodic_in_first_joint() {
        let r = canonical_3r::<f64>();
        let q = [0.3, -1.2, 2.2];
        let a = forward_kinematics(&r, &q).unwrap();
        let b = forward_kinematics(&r, &[q[0] + 2.0 * PI, q[1], q[2]]).unwrap();
        assert!(close(a.position, b.position, 1e-12));
        assert!(a.rotation.max_abs_diff(&b.rotation) < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let r = canonical_3r::<f64>();
        assert_eq!(forward_kinematics(&r, &[0.0; 6]), Err(Error::DimensionMismatch { expected: 3, got: 6 }));
        assert!(jacobian(&r, &[0.0]).is_err());
    }

    #[test]
    fn canonical_jacobian_columns_at_zero() {
        let r = canonical_3r::<f64>();
        let j = jacobian(&r, &[0.0; 3]).unwrap();
        let col = |c: usize| Vec3::new(j[(0, c)], j[(1, c)], j[(2, c)]);
        assert!(close(col(0), Vec3::new(-1.0, 4.5, 0.0), 1e-15));
        assert!(close(col(2), Vec3::new(0.0, 1.5, 0.0), 1e-15));
    }

    #[test]
    fn manipulability_identity_weight_is_abs_det() {
        let r = canonical_3r::<f64>();
        let q = [0.4, -0.9, 1.7];
        let mu = manipulability(&r, &q, &Mat::identity(3)).unwrap();
        let d = jacobian_determinant(&r, &q).unwrap();
        assert!((mu - d.abs()).abs() < 1e-12 * d.abs().max(1.0));
    }

    #[test]
    fn manipulability_rejects_indefinite_weight() {
        let r = canonical_3r::<f64>();
        let w = Mat::from_diagonal(&[1.0, -1.0, 1.0]);
        assert_eq!(manipulability(&r, &[0.0; 3], &w), Err(Error::NotPositiveDefinite { n: 3 }));
    }

    #[test]
    fn wrap_examples() {
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(-3.0 * PI / 2.0) - PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(0.0), 0.0);
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_to_pi(&[3.0 * PI]), vec![PI]);
    }

    #[test]
    fn cylindrical_examples() {
        let c = to_cylindrical(Vec3::new(1.0, 1.0, 0.0));
        assert!((c.rho - 2f64.sqrt()).abs() < 1e-15 && (c.phi - PI / 4.0).abs() < 1e-15 && c.z == 0.0);
        assert_eq!(to_cylindrical(Vec3::new(0.0, 0.0, 5.0)), CylindricalPoint { rho: 0.0, phi: 0.0, z: 5.0 });
        assert_eq!(to_cylindrical(Vec3::new(-1.0, 0.0, 2.0)), CylindricalPoint { rho: 1.0, phi: PI, z: 2.0 });
        assert_eq!(to_cylindrical(Vec3::new(-1.0, -0.0, 2.0)).phi, PI);
    }

    #[test]
    fn robot_validation() {
        let z = Vec3::<f64>::zeros();
        assert_eq!(RobotModel::new("x", vec![Vec3::ez(); 2], vec![z; 2], z), Err(Error::UnsupportedDof(2)));
        assert_eq!(RobotModel::new("x", vec![Vec3::ez(), z, Vec3::ez()], vec![z; 3], z), Err(Error::ZeroAxis(1)));
        let r = RobotModel::new("x", vec![Vec3::ez(); 3], vec![z; 3], z).unwrap();
        assert_eq!(r.clone().with_limits(vec![(0.0, 1.0), (1.0, 1.0), (0.0, 1.0)]), Err(Error::InvalidLimits(1)));
        let r = RobotModel::new("x", vec![Vec3::new(0.0, 0.0, 2.0); 3], vec![z; 3], z).unwrap();
        assert_eq!(r.axes()[0], Vec3::ez());
    }
}
