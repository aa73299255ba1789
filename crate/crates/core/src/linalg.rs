//! Fixed-size vectors, rotations and small dense matrices.
//!
//! Everything here is stack allocated. Dense matrices are capped at 6x6,
//! which covers every Jacobian and weight matrix a nonredundant arm needs.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::num::Real;

/// A 3-vector: positions in meters or unit directions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zeros() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn ex() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    pub fn ey() -> Self {
        Self::new(T::zero(), T::one(), T::zero())
    }

    pub fn ez() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > T::zero() && n.is_finite()).then(|| self * (T::one() / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()), U::lit(self.z.as_f64()))
    }

    pub fn max_abs(self) -> T {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> SubAssign for Vec3<T> {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 matrix. Used almost exclusively as a rotation; see [`Rot3`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T> {
    pub m: [[T; 3]; 3],
}

/// Rotation matrix in SO(3).
pub type Rot3<T> = Mat3<T>;

impl<T: Real> Mat3<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Self { m: [[o, z, z], [z, o, z], [z, z, o]] }
    }

    pub fn from_rows(m: [[T; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn from_cols(a: Vec3<T>, b: Vec3<T>, c: Vec3<T>) -> Self {
        Self { m: [[a.x, b.x, c.x], [a.y, b.y, c.y], [a.z, b.z, c.z]] }
    }

    pub fn col(&self, j: usize) -> Vec3<T> {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self { m: [[m[0][0], m[1][0], m[2][0]], [m[0][1], m[1][1], m[2][1]], [m[0][2], m[1][2], m[2][2]]] }
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Cross-product matrix: `skew(a) * b == a.cross(b)`.
    pub fn skew(a: Vec3<T>) -> Self {
        let z = T::zero();
        Self { m: [[z, -a.z, a.y], [a.z, z, -a.x], [-a.y, a.x, z]] }
    }

    /// Rotation by `angle` about the unit axis `axis` (Rodrigues formula).
    pub fn axis_angle(axis: Vec3<T>, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let k = Self::skew(axis);
        let kk = k * k;
        let mut r = Self::identity();
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] = r.m[i][j] + s * k.m[i][j] + (T::one() - c) * kk.m[i][j];
            }
        }
        r
    }

    pub fn rot_x(angle: T) -> Self {
        Self::axis_angle(Vec3::ex(), angle)
    }

    pub fn rot_z(angle: T) -> Self {
        Self::axis_angle(Vec3::ez(), angle)
    }

    /// Rotation from a quaternion `(w, x, y, z)`; the quaternion is normalized
    /// first so any nonzero scaling yields the same rotation.
    pub fn from_quat(q: [T; 4]) -> Self {
        let n = q.iter().map(|&v| v * v).sum::<T>().sqrt();
        let [w, x, y, z] = [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
        let two = T::lit(2.0);
        let o = T::one();
        Self {
            m: [
                [o - two * (y * y + z * z), two * (x * y - w * z), two * (x * z + w * y)],
                [two * (x * y + w * z), o - two * (x * x + z * z), two * (y * z - w * x)],
                [two * (x * z - w * y), two * (y * z + w * x), o - two * (x * x + y * y)],
            ],
        }
    }

    /// Unit quaternion `(w, x, y, z)` with `w >= 0`.
    pub fn to_quat(&self) -> [T; 4] {
        let m = &self.m;
        let one = T::one();
        let quarter = T::lit(0.25);
        let tr = self.trace();
        let q = if tr > T::zero() {
            let s = (tr + one).sqrt() * T::lit(2.0);
            [quarter * s, (m[2][1] - m[1][2]) / s, (m[0][2] - m[2][0]) / s, (m[1][0] - m[0][1]) / s]
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = (one + m[0][0] - m[1][1] - m[2][2]).sqrt() * T::lit(2.0);
            [(m[2][1] - m[1][2]) / s, quarter * s, (m[0][1] + m[1][0]) / s, (m[0][2] + m[2][0]) / s]
        } else if m[1][1] > m[2][2] {
            let s = (one + m[1][1] - m[0][0] - m[2][2]).sqrt() * T::lit(2.0);
            [(m[0][2] - m[2][0]) / s, (m[0][1] + m[1][0]) / s, quarter * s, (m[1][2] + m[2][1]) / s]
        } else {
            let s = (one + m[2][2] - m[0][0] - m[1][1]).sqrt() * T::lit(2.0);
            [(m[1][0] - m[0][1]) / s, (m[0][2] + m[2][0]) / s, (m[1][2] + m[2][1]) / s, quarter * s]
        };
        let n = q.iter().map(|&v| v * v).sum::<T>().sqrt();
        let sgn = if q[0] < T::zero() { -one } else { one };
        [q[0] * sgn / n, q[1] * sgn / n, q[2] * sgn / n, q[3] * sgn / n]
    }

    /// Rotation vector `theta * k` with `theta` in `[0, pi]`.
    pub fn log(&self) -> Vec3<T> {
        let m = &self.m;
        let half = T::lit(0.5);
        let v = Vec3::new(m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]) * half;
        let s = v.norm();
        let c = (self.trace() - T::one()) * half;
        let theta = s.atan2(c);
        if theta < T::lit(1e-6) {
            return v;
        }
        if theta < T::PI() - T::lit(1e-4) {
            return v * (theta / s);
        }
        // Near pi: extract the axis from the symmetric part, sign from v.
        let one_c = T::one() - c;
        let d = [m[0][0] - c, m[1][1] - c, m[2][2] - c];
        let i = if d[0] >= d[1] && d[0] >= d[2] {
            0
        } else if d[1] >= d[2] {
            1
        } else {
            2
        };
        let sym = |a: usize, b: usize| (m[a][b] + m[b][a]) * half;
        let mut axis = [T::zero(); 3];
        axis[i] = (d[i] / one_c).max(T::zero()).sqrt();
        for j in 0..3 {
            if j != i {
                axis[j] = (sym(i, j) / one_c) / axis[i];
            }
        }
        let mut k = Vec3::from_array(axis).normalized().unwrap_or_else(Vec3::ex);
        if k.dot(v) < T::zero() {
            k = -k;
        }
        k * theta
    }

    /// Geodesic distance on SO(3) between `self` and `other`, in radians.
    pub fn angle_to(&self, other: &Self) -> T {
        let rel = self.transpose() * *other;
        let m = &rel.m;
        let half = T::lit(0.5);
        let s = Vec3::new(m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]).norm() * half;
        let c = (rel.trace() - T::one()) * half;
        s.atan2(c)
    }

    /// Max-abs deviation of `R^T R` from identity and of `det R` from one.
    pub fn orthonormality_error(&self) -> T {
        let rtr = self.transpose() * *self;
        let id = Self::identity();
        let mut e = (self.det() - T::one()).abs();
        for i in 0..3 {
            for j in 0..3 {
                e = e.max((rtr.m[i][j] - id.m[i][j]).abs());
            }
        }
        e
    }

    pub fn max_abs_diff(&self, o: &Self) -> T {
        let mut e = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                e = e.max((self.m[i][j] - o.m[i][j]).abs());
            }
        }
        e
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }

    pub fn cast<U: Real>(&self) -> Mat3<U> {
        let mut out = Mat3::<U>::identity();
        for i in 0..3 {
            for j in 0..3 {
                out.m[i][j] = U::lit(self.m[i][j].as_f64());
            }
        }
        out
    }
}

impl<T: Real> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut r = [[T::zero(); 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j] + self.m[i][2] * o.m[2][j];
            }
        }
        Self { m: r }
    }
}

impl<T: Real> Mul<Vec3<T>> for Mat3<T> {
    type Output = Vec3<T>;
    fn mul(self, v: Vec3<T>) -> Vec3<T> {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }
}

/// Largest dimension a [`Mat`] can hold.
pub const MAX_DIM: usize = 6;

/// Small dense row-major matrix, at most 6x6, stored inline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: [T; MAX_DIM * MAX_DIM],
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows <= MAX_DIM && cols <= MAX_DIM, "matrix larger than {MAX_DIM}x{MAX_DIM}");
        Self { rows, cols, data: [T::zero(); MAX_DIM * MAX_DIM] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    /// Builds a matrix from a row-major slice of length `rows * cols`.
    pub fn from_row_slice(rows: usize, cols: usize, s: &[T]) -> Self {
        assert_eq!(s.len(), rows * cols);
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = s[i * cols + j];
            }
        }
        m
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[T]) -> [T; MAX_DIM] {
        assert_eq!(v.len(), self.cols);
        let mut out = [T::zero(); MAX_DIM];
        for (i, o) in out.iter_mut().enumerate().take(self.rows) {
            *o = (0..self.cols).map(|j| self[(i, j)] * v[j]).sum();
        }
        out
    }

    pub fn max_abs(&self) -> T {
        (0..self.rows).flat_map(|i| (0..self.cols).map(move |j| (i, j))).fold(T::zero(), |a, ij| a.max(self[ij].abs()))
    }

    pub fn is_finite(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| self[(i, j)].is_finite()))
    }

    /// In-place LU factorization with partial pivoting. Returns the row
    /// permutation and its sign, or `None` when a pivot is exactly zero.
    fn lu(&mut self) -> Option<([usize; MAX_DIM], T)> {
        let n = self.rows;
        let mut perm = [0usize; MAX_DIM];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i;
        }
        let mut sign = T::one();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&a, &b| {
                    self[(a, k)].abs().partial_cmp(&self[(b, k)].abs()).unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(k);
            if self[(p, k)] == T::zero() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    let t = self[(k, j)];
                    self[(k, j)] = self[(p, j)];
                    self[(p, j)] = t;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let piv = self[(k, k)];
            for i in (k + 1)..n {
                let f = self[(i, k)] / piv;
                self[(i, k)] = f;
                for j in (k + 1)..n {
                    let v = self[(k, j)];
                    self[(i, j)] = self[(i, j)] - f * v;
                }
            }
        }
        Some((perm, sign))
    }

    /// Determinant of a square matrix.
    pub fn det(&self) -> T {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let mut a = *self;
        match a.lu() {
            None => T::zero(),
            Some((_, sign)) => (0..self.rows).fold(sign, |acc, i| acc * a[(i, i)]),
        }
    }

    /// Solves `self * x = b` for square `self`; `None` if singular.
    pub fn solve(&self, b: &[T]) -> Option<[T; MAX_DIM]> {
        assert!(self.is_square());
        let n = self.rows;
        assert_eq!(b.len(), n);
        let mut a = *self;
        let (perm, _) = a.lu()?;
        let mut x = [T::zero(); MAX_DIM];
        for i in 0..n {
            let mut s = b[perm[i]];
            for j in 0..i {
                s = s - a[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s = s - a[(i, j)] * x[j];
            }
            x[i] = s / a[(i, i)];
        }
        x.iter().take(n).all(|v| v.is_finite()).then_some(x)
    }

    /// True when the matrix is symmetric (relative tolerance `1e-12`) and its
    /// Cholesky factorization succeeds with strictly positive pivots.
    pub fn is_symmetric_positive_definite(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows;
        let scale = self.max_abs().max(T::min_positive_value());
        for i in 0..n {
            for j in 0..i {
                if (self[(i, j)] - self[(j, i)]).abs() > T::tol(1e-12) * scale {
                    return false;
                }
            }
        }
        let mut l = Self::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if !(d > T::zero()) {
                return false;
            }
            let dj = d.sqrt();
            l[(j, j)] = dj;
            for i in (j + 1)..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / dj;
            }
        }
        true
    }
}

impl<T: Real> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * MAX_DIM + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * MAX_DIM + j]
    }
}

impl<T: Real> Mul for Mat<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        assert_eq!(self.cols, o.rows, "dimension mismatch in matrix product");
        let mut r = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                r[(i, j)] = (0..self.cols).map(|k| self[(i, k)] * o[(k, j)]).sum();
            }
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn axis_angle_about_z_rotates_x_to_y() {
        let r = Mat3::axis_angle(Vec3::ez(), PI / 2.0);
        let v = r * Vec3::ex();
        assert!((v - Vec3::ey()).norm() < 1e-15);
    }

    #[test]
    fn quaternion_round_trip() {
        let axis = Vec3::new(0.3, -0.4, 0.866).normalized().unwrap();
        for &ang in &[0.0, 0.1, 1.5, 3.0, PI] {
            let r = Mat3::axis_angle(axis, ang);
            let q = r.to_quat();
            assert!(Mat3::from_quat(q).max_abs_diff(&r) < 1e-14);
        }
    }

    #[test]
    fn log_recovers_rotation_vector_near_pi() {
        let axis = Vec3::new(1.0, 2.0, -0.5).normalized().unwrap();
        for &ang in &[1e-9, 0.3, 2.9, PI - 1e-7, PI] {
            let r = Mat3::axis_angle(axis, ang);
            let w = r.log();
            let back = Mat3::axis_angle(w.normalized().unwrap_or(axis), w.norm());
            assert!(back.max_abs_diff(&r) < 1e-9, "angle {ang}");
        }
    }

    #[test]
    fn lu_determinant_and_solve() {
        let a = Mat::<f64>::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        assert!((a.det() - 18.0).abs() < 1e-12);
        let x = a.solve(&[1.0, 2.0, 3.0]).unwrap();
        let b = a.mul_vec(&x[..3]);
        assert!((b[0] - 1.0).abs() < 1e-12 && (b[1] - 2.0).abs() < 1e-12 && (b[2] - 3.0).abs() < 1e-12);
        let s = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(s.det(), 0.0);
        assert!(s.solve(&[1.0, 1.0]).is_none());
    }

    #[test]
    fn spd_check() {
        assert!(Mat::<f64>::identity(4).is_symmetric_positive_definite());
        let a = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(!a.is_symmetric_positive_definite());
        let b = Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(!b.is_symmetric_positive_definite());
    }
}
