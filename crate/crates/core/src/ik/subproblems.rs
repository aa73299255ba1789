//! Closed-form rotation subproblems used by the structured solvers.

use crate::linalg::{Mat3, Vec3};
use crate::num::Real;

/// Angle `theta` minimizing `|rot(k, theta) p - q|`. Exact when `p` and `q`
/// have equal length and equal component along `k`.
pub fn rotate_onto<T: Real>(k: Vec3<T>, p: Vec3<T>, q: Vec3<T>) -> T {
    let pp = p - k * k.dot(p);
    let qp = q - k * k.dot(q);
    k.dot(pp.cross(qp)).atan2(pp.dot(qp))
}

/// Coefficients of `h^T rot(k, theta) p = a cos(theta) + b sin(theta) + c`.
#[derive(Debug, Clone, Copy)]
pub struct Sinusoid<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> Sinusoid<T> {
    pub fn new(h: Vec3<T>, k: Vec3<T>, p: Vec3<T>) -> Self {
        let kp = k.dot(p);
        Self { a: h.dot(p - k * kp), b: h.dot(k.cross(p)), c: h.dot(k) * kp }
    }

    pub fn amplitude(&self) -> T {
        self.a.hypot(self.b)
    }

    /// Normalized argument `x` and phase `phi` such that the solutions of
    /// `h^T rot(k, theta) p = d` are `phi +/- acos(x)` whenever `|x| <= 1`.
    pub fn solve_form(&self, d: T) -> Option<(T, T)> {
        let r = self.amplitude();
        if !(r > T::zero()) {
            return None;
        }
        Some(((d - self.c) / r, self.b.atan2(self.a)))
    }
}

/// All `theta` with `h^T rot(k, theta) p = d`; empty if none or degenerate.
pub fn axis_projection<T: Real>(h: Vec3<T>, k: Vec3<T>, p: Vec3<T>, d: T) -> Vec<T> {
    let s = Sinusoid::new(h, k, p);
    match s.solve_form(d) {
        Some((x, phi)) if x.abs() <= T::one() => {
            let a = x.acos();
            if a == T::zero() {
                vec![phi]
            } else {
                vec![phi + a, phi - a]
            }
        }
        _ => Vec::new(),
    }
}

/// Rotation about `k` by `theta` applied to `p`.
#[inline]
pub fn rotate<T: Real>(k: Vec3<T>, theta: T, p: Vec3<T>) -> Vec3<T> {
    let (s, c) = theta.sin_cos();
    p * c + k.cross(p) * s + k * (k.dot(p) * (T::one() - c))
}

/// Solves `rot(h1, a) rot(h2, b) rot(h3, c) = r` for spherical-wrist style
/// triples with `h1 x h2 != 0` and `h2 x h3 != 0`. Returns up to two triples.
pub fn three_axis_orientation<T: Real>(h1: Vec3<T>, h2: Vec3<T>, h3: Vec3<T>, r: &Mat3<T>) -> Vec<[T; 3]> {
    // h1^T rot(h2, b) h3 = h1^T r h3 fixes b.
    let target = h1.dot(*r * h3);
    let mut out = Vec::new();
    for b in axis_projection(h1, h2, h3, target) {
        let v = rotate(h2, b, h3);
        let a = rotate_onto(h1, v, *r * h3);
        let r12 = Mat3::axis_angle(h1, a) * Mat3::axis_angle(h2, b);
        let rest = r12.transpose() * *r;
        // Any vector not parallel to h3 pins c.
        let probe = if h3.cross(Vec3::ex()).norm() > T::lit(0.5) { Vec3::ex() } else { Vec3::ey() };
        let c = rotate_onto(h3, probe, rest * probe);
        out.push([a, b, c]);
    }
    out
}
