//! Floating point abstraction shared by every numerical routine.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar the simulator is generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(value: f64) -> T {
    T::from_f64(value).expect("f64 literal representable in target scalar")
}

#[inline]
pub fn from_count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable in target scalar")
}

#[inline]
pub(crate) fn to_f64<T: Real>(value: T) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Error function for any scalar, evaluated in double precision.
pub fn erf<T: Real>(x: T) -> T {
    lit(libm::erf(to_f64(x)))
}
