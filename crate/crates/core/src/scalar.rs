//! Scalar abstraction for the deterministic numerics.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::{Debug, Display};

/// Floating-point scalar the core math is generic over.
///
/// `f32` works for quick exploration; all shipped defaults and the
/// stochastic layers use `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for coefficients and defaults.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal must convert")
    }

    fn to_f64(self) -> f64;
}

impl Real for f32 {
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64(self) -> f64 {
        self
    }
}

/// `sqrt(1 + |x|^2)`, the Japanese bracket of a 3-vector.
pub fn bracket<T: Real>(x: &[T; 3]) -> T {
    (T::one() + norm_sq(x)).sqrt()
}

/// Bracket of a radius: `sqrt(1 + r^2)`.
pub fn bracket_r<T: Real>(r: T) -> T {
    (T::one() + r * r).sqrt()
}

pub fn norm_sq<T: Real>(x: &[T; 3]) -> T {
    x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
}

pub fn norm<T: Real>(x: &[T; 3]) -> T {
    norm_sq(x).sqrt()
}

pub fn dot<T: Real>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn sub<T: Real>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add<T: Real>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale<T: Real>(a: &[T; 3], s: T) -> [T; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_at_origin_is_one() {
        assert_eq!(bracket(&[0.0f64, 0.0, 0.0]), 1.0);
        assert!((bracket(&[1.0f64, 2.0, 2.0]) - 10.0f64.sqrt()).abs() < 1e-15);
    }
}
