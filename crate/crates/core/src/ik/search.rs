//! One-dimensional search solvers for structured arms.
//!
//! Each structured arm reduces IK to a family over one joint `s`: at fixed
//! `s` a second joint follows in closed form from `phi +/- acos(x)`, and a
//! scalar residual measures the remaining constraint. The two `acos`
//! branches meet where `|x|` reaches one, so together they trace closed
//! curves over `s`. Sign changes along those curves are the IK solutions and
//! the remaining joints follow from rotation subproblems. Near-zero local
//! minima of the residual seed continuous approximate solutions at
//! workspace boundaries.
//!
//! * 3R positioning arm (`h1 x h2 != 0`), `s = q3`: `h1 . u = h1 . d` fixes
//!   `q2`, the residual is `|u| - |d|` with `u = p12 + R2 (p23 + R3 p3T)`.
//! * 6R arm with `h2 = h3 = h4`, `s = q1`: the orientation fixes `q5` and
//!   `q2 + q3 + q4`, the residual is the position error along the shared
//!   axis, and `q2`, `q3` then solve a planar two-link problem.

use super::subproblems::{rotate, rotate_onto, three_axis_orientation, Sinusoid};
use super::IKConfig;
use crate::kinematics::{Pose, RobotModel};
use crate::linalg::{Mat3, Vec3};
use crate::num::{golden, Real};

/// Kinematic structure an arm was recognised to have.
#[derive(Debug, Clone, PartialEq)]
pub enum Structure<T> {
    /// No exploitable structure; multi-start refinement is used.
    Generic,
    /// 3R arm whose first two axes are not parallel.
    Position3R,
    /// 6R arm whose last three axes meet in a point, on a 3R positioning arm
    /// whose first two axes are not parallel.
    SphericalWrist { arm: RobotModel<T> },
    /// 6R arm whose second, third and fourth axes are equal, with the first
    /// and fifth axes not parallel to them and the last two not parallel.
    ParallelTriple,
}

fn independent<T: Real>(a: Vec3<T>, b: Vec3<T>) -> bool {
    a.cross(b).norm() > T::tol(1e-6)
}

fn same_axis<T: Real>(a: Vec3<T>, b: Vec3<T>) -> bool {
    !independent(a, b) && a.dot(b) > T::zero()
}

impl<T: Real> Structure<T> {
    pub fn detect(robot: &RobotModel<T>) -> Self {
        let h = robot.axes();
        if !independent(h[0], h[1]) {
            return Self::Generic;
        }
        match robot.dof() {
            3 => Self::Position3R,
            6 => {
                let o = robot.offsets();
                let scale = robot.reach().max(T::one());
                let intersect = o[4].norm() <= T::tol(1e-12) * scale && o[5].norm() <= T::tol(1e-12) * scale;
                if intersect && independent(h[3], h[4]) && independent(h[4], h[5]) {
                    let arm = RobotModel::new(format!("{}-arm", robot.name()), h[..3].to_vec(), o[..3].to_vec(), o[3])
                        .expect("sub-chain of a valid robot");
                    Self::SphericalWrist { arm }
                } else if same_axis(h[1], h[2])
                    && same_axis(h[1], h[3])
                    && independent(h[1], h[4])
                    && independent(h[4], h[5])
                {
                    Self::ParallelTriple
                } else {
                    Self::Generic
                }
            }
            _ => Self::Generic,
        }
    }

    /// Unpolished candidate configurations for `target`.
    pub(super) fn candidates(&self, robot: &RobotModel<T>, target: &Pose<T>, cfg: &IKConfig<T>) -> Vec<Vec<T>> {
        match self {
            Self::Generic => Vec::new(),
            Self::Position3R => scan(&Arm::new(robot, target.position), cfg),
            Self::SphericalWrist { arm } => {
                let h = robot.axes();
                let center = target.position - target.rotation * robot.tool();
                let mut out = Vec::new();
                for q in scan(&Arm::new(arm, center), cfg) {
                    let r03 =
                        Mat3::axis_angle(h[0], q[0]) * Mat3::axis_angle(h[1], q[1]) * Mat3::axis_angle(h[2], q[2]);
                    let r36 = r03.transpose() * target.rotation;
                    for w in three_axis_orientation(h[3], h[4], h[5], &r36) {
                        out.push(vec![q[0], q[1], q[2], w[0], w[1], w[2]]);
                    }
                }
                out
            }
            Self::ParallelTriple => scan(&Triple::new(robot, target), cfg),
        }
    }
}

/// Closed-form data at one value of the search variable.
#[derive(Clone, Copy)]
struct Slice<T, D> {
    s: T,
    /// Normalized argument of the `acos`; solvable when `|x| <= 1`.
    x: T,
    phi: T,
    amp: T,
    data: D,
}

impl<T: Real, D> Slice<T, D> {
    fn new(s: T, form: Sinusoid<T>, delta: T, data: D) -> Self {
        match form.solve_form(delta) {
            Some((x, phi)) => Slice { s, x, phi, amp: form.amplitude(), data },
            None => Slice { s, x: T::infinity(), phi: T::zero(), amp: T::zero(), data },
        }
    }

    fn solvable(&self) -> bool {
        self.amp > T::zero() && self.x.abs() <= T::one()
    }

    /// Branch angle with `x` clamped into `[-1, 1]`.
    fn angle(&self, sign: T) -> T {
        self.phi + sign * self.x.max(-T::one()).min(T::one()).acos()
    }
}

trait Family<T: Real> {
    type Data: Copy;
    fn slice(&self, s: T) -> Slice<T, Self::Data>;
    fn residual(&self, sl: &Slice<T, Self::Data>, sign: T) -> T;
    fn configs(&self, sl: &Slice<T, Self::Data>, sign: T, out: &mut Vec<Vec<T>>);
    /// Converts `acos` overshoot times amplitude into residual units.
    fn excess_scale(&self) -> T {
        T::one()
    }
}

/// 3R positioning arm aimed at one point, searched over `q3`.
struct Arm<T> {
    h1: Vec3<T>,
    h2: Vec3<T>,
    h3: Vec3<T>,
    p12: Vec3<T>,
    p23: Vec3<T>,
    p3t: Vec3<T>,
    d: Vec3<T>,
    dn: T,
    delta: T,
}

impl<T: Real> Arm<T> {
    fn new(robot: &RobotModel<T>, p: Vec3<T>) -> Self {
        let h = robot.axes();
        let o = robot.offsets();
        let d = p - o[0];
        Self {
            h1: h[0],
            h2: h[1],
            h3: h[2],
            p12: o[1],
            p23: o[2],
            p3t: robot.tool(),
            d,
            dn: d.norm(),
            delta: h[0].dot(d) - h[0].dot(o[1]),
        }
    }
}

impl<T: Real> Family<T> for Arm<T> {
    type Data = Vec3<T>;

    fn slice(&self, q3: T) -> Slice<T, Vec3<T>> {
        let w = self.p23 + rotate(self.h3, q3, self.p3t);
        Slice::new(q3, Sinusoid::new(self.h1, self.h2, w), self.delta, w)
    }

    fn residual(&self, sl: &Slice<T, Vec3<T>>, sign: T) -> T {
        (self.p12 + rotate(self.h2, sl.angle(sign), sl.data)).norm() - self.dn
    }

    fn configs(&self, sl: &Slice<T, Vec3<T>>, sign: T, out: &mut Vec<Vec<T>>) {
        let q2 = sl.angle(sign);
        let u = self.p12 + rotate(self.h2, q2, sl.data);
        out.push(vec![rotate_onto(self.h1, u, self.d), q2, sl.s]);
    }
}

/// 6R arm with three equal middle axes, searched over `q1`.
struct Triple<T> {
    h1: Vec3<T>,
    /// Shared axis of joints 2 to 4.
    h: Vec3<T>,
    h5: Vec3<T>,
    h6: Vec3<T>,
    p12: Vec3<T>,
    p23: Vec3<T>,
    p34: Vec3<T>,
    p45: Vec3<T>,
    p56: Vec3<T>,
    p6t: Vec3<T>,
    d: Vec3<T>,
    r: Mat3<T>,
    wrist: Sinusoid<T>,
    axial: T,
    reach: T,
}

impl<T: Real> Triple<T> {
    fn new(robot: &RobotModel<T>, target: &Pose<T>) -> Self {
        let h = robot.axes();
        let o = robot.offsets();
        Self {
            h1: h[0],
            h: h[1],
            h5: h[4],
            h6: h[5],
            p12: o[1],
            p23: o[2],
            p34: o[3],
            p45: o[4],
            p56: o[5],
            p6t: robot.tool(),
            d: target.position - o[0],
            r: target.rotation,
            wrist: Sinusoid::new(h[1], h[4], h[5]),
            axial: h[1].dot(o[2] + o[3]),
            reach: robot.reach().max(T::one()),
        }
    }

    /// Sum `q2 + q3 + q4` and `q5` on a branch, and the vector the planar
    /// pair must reach, `rot(h, q2) (p23 + rot(h, q3) p34)`.
    fn wrist_and_reach(&self, sl: &Slice<T, Mat3<T>>, sign: T) -> (T, T, Vec3<T>) {
        let m = sl.data;
        let q5 = sl.angle(sign);
        let theta = rotate_onto(self.h, rotate(self.h5, q5, self.h6), m * self.h6);
        let tail = self.p45 + rotate(self.h5, q5, self.p56);
        let v = rotate(self.h1, -sl.s, self.d) - self.p12 - rotate(self.h, theta, tail) - m * self.p6t;
        (theta, q5, v)
    }
}

impl<T: Real> Family<T> for Triple<T> {
    type Data = Mat3<T>;

    fn slice(&self, q1: T) -> Slice<T, Mat3<T>> {
        let m = Mat3::axis_angle(self.h1, q1).transpose() * self.r;
        Slice::new(q1, self.wrist, self.h.dot(m * self.h6), m)
    }

    fn residual(&self, sl: &Slice<T, Mat3<T>>, sign: T) -> T {
        self.h.dot(self.wrist_and_reach(sl, sign).2) - self.axial
    }

    fn configs(&self, sl: &Slice<T, Mat3<T>>, sign: T, out: &mut Vec<Vec<T>>) {
        let (theta, q5, v) = self.wrist_and_reach(sl, sign);
        let rest = (Mat3::axis_angle(self.h, theta) * Mat3::axis_angle(self.h5, q5)).transpose() * sl.data;
        let probe = if self.h6.cross(Vec3::ex()).norm() > T::lit(0.5) { Vec3::ex() } else { Vec3::ey() };
        let q6 = rotate_onto(self.h6, probe, rest * probe);
        let half = (v.dot(v) - self.p23.dot(self.p23) - self.p34.dot(self.p34)) * T::lit(0.5);
        let elbow = Slice::new(sl.s, Sinusoid::new(self.p23, self.h, self.p34), half, ());
        if !(elbow.amp > T::zero()) {
            return;
        }
        for s in [T::one(), -T::one()] {
            let q3 = elbow.angle(s);
            let q2 = rotate_onto(self.h, self.p23 + rotate(self.h, q3, self.p34), v);
            out.push(vec![sl.s, q2, q3, theta - q2 - q3, q5, q6]);
        }
    }

    fn excess_scale(&self) -> T {
        self.reach
    }
}

const BISECT_ITERS: usize = 80;

/// A family together with its slices at the grid points.
struct Grid<'a, T: Real, F: Family<T>> {
    f: &'a F,
    slices: Vec<Slice<T, F::Data>>,
}

impl<T: Real, F: Family<T>> Grid<'_, T, F> {
    fn slice(&self, p: CurvePoint<T>) -> Slice<T, F::Data> {
        match p.grid {
            Some(j) => self.slices[j],
            None => self.f.slice(p.s),
        }
    }

    fn eval(&self, p: CurvePoint<T>) -> T {
        self.f.residual(&self.slice(p), p.sign)
    }

    fn emit(&self, p: CurvePoint<T>, out: &mut Vec<Vec<T>>) {
        self.f.configs(&self.slice(p), p.sign, out)
    }
}

/// Point between a solvable `a` and unsolvable `b` where the branches meet.
fn junction<T: Real, F: Family<T>>(f: &F, a: T, b: T) -> T {
    let (mut lo, mut hi) = (a, b);
    for _ in 0..BISECT_ITERS {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        if f.slice(mid).solvable() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Root of the residual on a piecewise-linear curve parameter, given a sign
/// change between `lo` and `hi`.
fn bisect<T: Real, F: Family<T>>(g: &Grid<T, F>, path: &Piecewise<T>, mut lo: T, mut hi: T, out: &mut Vec<Vec<T>>) {
    let mut flo = g.eval(path.point(lo));
    for _ in 0..BISECT_ITERS {
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = g.eval(path.point(mid));
        if fm == T::zero() {
            lo = mid;
            break;
        }
        if (fm < T::zero()) == (flo < T::zero()) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    g.emit(path.point(lo), out)
}

/// Roots and near-roots on one closed branch curve.
fn scan_curve<T: Real, F: Family<T>>(g: &Grid<T, F>, curve: &Curve<T>, limit: T, out: &mut Vec<Vec<T>>) {
    let len = curve.pts.len() as isize;
    let e: Vec<T> = (0..len).map(|i| g.eval(curve.get(i))).collect();
    let ev = |i: isize| e[i.rem_euclid(len) as usize];
    for i in 0..len {
        let (a, b) = (ev(i), ev(i + 1));
        if a == T::zero() {
            g.emit(curve.get(i), out);
        } else if b != T::zero() && (a < T::zero()) != (b < T::zero()) {
            let path = Piecewise(vec![curve.get(i), curve.get(i + 1)]);
            bisect(g, &path, T::zero(), T::one(), out);
        }
    }
    // A local minimum of |e| without a sign change may hide a pair of roots
    // closer together than the sampling step.
    for i in 0..len {
        let (prev, cur, next) = (ev(i - 1), ev(i), ev(i + 1));
        let same = |x: T| x != T::zero() && (x < T::zero()) == (cur < T::zero());
        if cur == T::zero() || !same(prev) || !same(next) || cur.abs() > prev.abs() || cur.abs() > next.abs() {
            continue;
        }
        let path = Piecewise(vec![curve.get(i - 1), curve.get(i), curve.get(i + 1)]);
        let s = cur.signum();
        let (u, fu) = golden(|u| s * g.eval(path.point(u)), T::zero(), T::lit(2.0));
        if fu <= T::zero() {
            bisect(g, &path, T::zero(), u, out);
            bisect(g, &path, T::lit(2.0), u, out);
        } else if fu < limit {
            g.emit(path.point(u), out);
        }
    }
}

fn scan<T: Real, F: Family<T>>(f: &F, cfg: &IKConfig<T>) -> Vec<Vec<T>> {
    let n = cfg.search_samples;
    let two_pi = T::PI() + T::PI();
    let step = two_pi / T::lit(n as f64);
    let s_of = |j: usize| -T::PI() + step * T::lit(j as f64);
    let g = Grid { f, slices: (0..n).map(|j| f.slice(s_of(j))).collect() };
    let solvable: Vec<bool> = g.slices.iter().map(|s| s.solvable()).collect();
    let limit = cfg.approx_tol * T::lit(4.0);
    let (plus, minus) = (T::one(), -T::one());
    let mut out = Vec::new();

    match solvable.iter().position(|&s| !s) {
        None => {
            for sign in [plus, minus] {
                let pts = (0..n).map(|j| CurvePoint { s: s_of(j), sign, junction: false, grid: Some(j) }).collect();
                scan_curve(&g, &Curve { pts, period: two_pi }, limit, &mut out);
            }
        }
        Some(gap) => {
            // Each run of solvable samples carries both branches, which join
            // at the run's ends into one closed curve.
            let mut k = 0;
            while k < n {
                let start = (gap + k) % n;
                if !solvable[start] {
                    k += 1;
                    continue;
                }
                let mut len = 0;
                while len < n && solvable[(start + len) % n] {
                    len += 1;
                }
                let first = s_of(start);
                let last = first + step * T::lit((len - 1) as f64);
                let j_lo = junction(f, first, first - step);
                let j_hi = junction(f, last, last + step);
                let at = |m: usize, sign: T| CurvePoint {
                    s: first + step * T::lit(m as f64),
                    sign,
                    junction: false,
                    grid: Some((start + m) % n),
                };
                let mut pts = Vec::with_capacity(2 * len + 2);
                pts.push(CurvePoint { s: j_lo, sign: plus, junction: true, grid: None });
                pts.extend((0..len).map(|m| at(m, plus)));
                pts.push(CurvePoint { s: j_hi, sign: plus, junction: true, grid: None });
                pts.extend((0..len).rev().map(|m| at(m, minus)));
                scan_curve(&g, &Curve { pts, period: T::zero() }, limit, &mut out);
                k += len;
            }
        }
    }

    if cfg.include_approximate {
        let scale = f.excess_scale();
        for sign in [plus, minus] {
            let sur: Vec<T> = g
                .slices
                .iter()
                .map(|sl| {
                    if !(sl.amp > T::zero()) {
                        return T::infinity();
                    }
                    let excess = (sl.x.abs() - T::one()).max(T::zero()) * sl.amp * scale;
                    f.residual(sl, sign).abs() + excess
                })
                .collect();
            for i in 0..n {
                let (prev, next) = (sur[(i + n - 1) % n], sur[(i + 1) % n]);
                if sur[i] < limit && sur[i] <= prev && sur[i] <= next {
                    f.configs(&g.slices[i], sign, &mut out);
                }
            }
        }
    }
    out
}

/// A point on a branch curve: the search variable `s` and the `acos` branch sign. At a
/// junction both branches coincide, so the sign there is immaterial.
#[derive(Clone, Copy)]
struct CurvePoint<T> {
    s: T,
    sign: T,
    junction: bool,
    /// Index of the grid slice this point sits on, if any.
    grid: Option<usize>,
}

/// Closed sequence of curve points. `period` is added to `s` per lap so
/// that consecutive points stay adjacent across the wrap.
struct Curve<T> {
    pts: Vec<CurvePoint<T>>,
    period: T,
}

impl<T: Real> Curve<T> {
    fn get(&self, i: isize) -> CurvePoint<T> {
        let len = self.pts.len() as isize;
        let lap = T::lit(i.div_euclid(len) as f64);
        let p = self.pts[i.rem_euclid(len) as usize];
        CurvePoint { s: p.s + self.period * lap, ..p }
    }
}

/// Polyline through curve points, parameterized by `u` in `[0, len - 1]`.
/// Within a segment the branch is that of whichever end is not a junction.
struct Piecewise<T>(Vec<CurvePoint<T>>);

impl<T: Real> Piecewise<T> {
    fn point(&self, u: T) -> CurvePoint<T> {
        let last = self.0.len() - 1;
        let i = u.floor().to_usize().unwrap_or(0).min(last - 1);
        let t = u - T::lit(i as f64);
        let (a, b) = (self.0[i], self.0[i + 1]);
        let sign = if a.junction { b.sign } else { a.sign };
        CurvePoint { s: a.s + (b.s - a.s) * t, sign, junction: false, grid: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{canonical_3r, elbow_3r, three_parallel_cuspidal, wrist_6r};

    #[test]
    fn detects_structure() {
        assert_eq!(Structure::detect(&canonical_3r::<f64>()), Structure::Position3R);
        assert_eq!(Structure::detect(&elbow_3r::<f64>()), Structure::Position3R);
        assert!(matches!(Structure::detect(&wrist_6r::<f64>()), Structure::SphericalWrist { .. }));
        assert_eq!(Structure::detect(&three_parallel_cuspidal::<f64>()), Structure::ParallelTriple);
    }
}
