//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the kinematics, planner and optimizer are generic over.
///
/// Implemented for `f32` and `f64`. Tolerance defaults are derived from
/// [`Real::tol`] so that the same configuration code works in both precisions.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Lossy conversion back to `f64`, used for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// `x` floored at a small multiple of machine epsilon. An `f64` tolerance
    /// of 1e-8 stays 1e-8, an `f32` one becomes roughly 1.2e-5.
    #[inline]
    fn tol(x: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(100.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Golden-section minimization on `[a, b]`; returns the best point seen.
pub(crate) fn golden<T: Real>(f: impl Fn(T) -> T, a: T, b: T) -> (T, T) {
    let r = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let (mut a, mut b) = (a, b);
    let mut c = b - (b - a) * r;
    let mut d = a + (b - a) * r;
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = if fc < fd { (c, fc) } else { (d, fd) };
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * r;
            fc = f(c);
            if fc < best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * r;
            fd = f(d);
            if fd < best.1 {
                best = (d, fd);
            }
        }
        if fc <= T::zero() && fc < fd || fd <= T::zero() && fd <= fc {
            break;
        }
    }
    best
}
