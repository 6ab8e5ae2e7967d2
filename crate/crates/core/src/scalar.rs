//! Floating-point scalar abstraction shared by every solver.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real scalar type the solvers are generic over.
///
/// Implemented for `f32` and `f64`. The associated tolerances scale with the
/// precision of the type: the `f64` values are the reference ones, `f32`
/// relaxes them to what single precision can actually certify.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Allowed deviation of a kernel row sum from 1.
    const ROW_SUM_TOL: f64;
    /// Allowed deviation of a distribution's mass from 1.
    const SIMPLEX_TOL: f64;
    /// Negative entries above `-CLAMP_TOL` are rounding noise and clamp to 0.
    const CLAMP_TOL: f64;

    /// Converts an `f64` literal. Every `Scalar` can represent (an
    /// approximation of) any finite `f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    #[inline]
    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("usize fits in a float")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("float converts to f64")
    }
}

impl Scalar for f64 {
    const ROW_SUM_TOL: f64 = 1e-12;
    const SIMPLEX_TOL: f64 = 1e-10;
    const CLAMP_TOL: f64 = 1e-14;
}

impl Scalar for f32 {
    const ROW_SUM_TOL: f64 = 1e-5;
    const SIMPLEX_TOL: f64 = 1e-4;
    const CLAMP_TOL: f64 = 1e-6;
}

/// `‖x‖_∞`.
pub fn norm_inf<T: Scalar>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()))
}

/// `‖x − y‖_∞`. Slices must have equal length.
pub fn dist_inf<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
}

/// `⟨x, y⟩`.
pub fn dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

/// `max(x − y) − min(x − y)`: zero iff `x − y` is a constant vector.
pub fn shift_spread<T: Scalar>(x: &[T], y: &[T]) -> T {
    debug_assert_eq!(x.len(), y.len());
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for (&a, &b) in x.iter().zip(y) {
        let d = a - b;
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if x.is_empty() {
        T::zero()
    } else {
        hi - lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        assert_eq!(norm_inf(&[1.0, -3.0, 2.0]), 3.0);
        assert_eq!(dist_inf(&[1.0, 2.0], &[0.5, 4.0]), 2.0);
        assert_eq!(dot(&[1.0f32, 2.0], &[3.0, 4.0]), 11.0);
        assert_eq!(shift_spread(&[3.0, 4.0], &[1.0, 2.0]), 0.0);
        assert_eq!(shift_spread(&[3.0, 5.0], &[1.0, 2.0]), 1.0);
    }
}
