//! Scalar abstraction shared by the numeric modules.
//!
//! Everything downstream of the timeline (coefficients of variation, feature
//! aggregates, standardization, classifiers, similarity and layout) is written
//! against [`Real`], with `f32` and `f64` implementations.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point type usable throughout the pipeline.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` constant.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Arithmetic mean; zero for an empty slice.
pub fn mean<T: Real>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    values.iter().copied().sum::<T>() / T::from_count(values.len())
}

/// Population standard deviation (no Bessel correction); zero for an empty slice.
pub fn population_std<T: Real>(values: &[T]) -> T {
    if values.is_empty() {
        return T::zero();
    }
    let mu = mean(values);
    let var = values.iter().map(|&v| (v - mu) * (v - mu)).sum::<T>() / T::from_count(values.len());
    var.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_std_has_no_bessel_correction() {
        assert_eq!(population_std(&[2.0_f64, 4.0]), 1.0);
        assert_eq!(population_std(&[7.0_f32]), 0.0);
        assert_eq!(population_std::<f64>(&[]), 0.0);
    }

    #[test]
    fn mean_works_for_both_widths() {
        assert_eq!(mean(&[1.0_f32, 2.0, 3.0]), 2.0);
        assert_eq!(mean(&[1.0_f64, 2.0]), 1.5);
    }
}
