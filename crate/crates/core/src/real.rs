//! Scalar abstraction for image data.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating-point scalar usable as a pixel value.
///
/// Implemented by `f32` and `f64`. Statistical laws and thresholds are always
/// computed in `f64` (see [`crate::tomo`]); this trait governs image storage
/// and the linear filtering/reconstruction paths.
pub trait Real:
    Float + FromPrimitive + NumAssign + Sum<Self> + Debug + Display + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FromPrimitive + NumAssign + Sum<Self> + Debug + Display + Send + Sync + 'static
{
}

/// Shorthand for the `f64 -> T` conversion, which cannot fail for the
/// scalar types this crate supports.
#[inline]
pub fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 must convert into a Real scalar")
}

/// Lossless-for-practical-purposes widening used by the statistics layer.
#[inline]
pub fn widen<T: Real>(x: T) -> f64 {
    x.to_f64().expect("Real scalar must convert into f64")
}
