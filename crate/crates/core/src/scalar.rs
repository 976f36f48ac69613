//! Scalar abstraction shared by the objective, solvers and metrics.
//!
//! Everything numeric in the crate is generic over [`Scalar`], which is
//! implemented for `f32` and `f64`. Instances read from disk are always
//! `f64`; narrower types are obtained with [`Instance::cast`](crate::Instance::cast).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive};

/// Floating point type usable as an edge weight.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Sum + Send + Sync + serde::Serialize + 'static
{
    /// Lossy conversion from `f64`.
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("f64 converts to any float")
    }

    /// Lossless widening to `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("float converts to f64")
    }

    fn of_usize(value: usize) -> Self {
        Self::from_usize(value).expect("usize converts to any float")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Neumaier-compensated sum.
pub fn compensated_sum<T: Scalar>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut carry = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry = carry + ((sum - t) + v);
        } else {
            carry = carry + ((v - t) + sum);
        }
        sum = t;
    }
    sum + carry
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn approx_eq<T: Scalar>(a: T, b: T, tol: T) -> bool {
    let scale = T::one().max(a.abs()).max(b.abs());
    (a - b).abs() <= tol * scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let xs = [1.0e16_f64, 1.0, -1.0e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
        assert_eq!(compensated_sum::<f32>([]), 0.0);
    }

    #[test]
    fn approx_eq_is_relative_above_one() {
        assert!(approx_eq(1.0e6, 1.0e6 + 1.0e-4, 1e-9));
        assert!(!approx_eq(1.0, 1.0 + 1e-6, 1e-9));
    }
}
