//! Scalar abstraction shared by the closed-form parts of the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar accepted by the laws, physical constants, kinetics
/// and spectral formulas: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub(crate) fn lit<F: Real>(x: f64) -> F {
    F::from_f64(x).expect("literal representable in the working scalar")
}

/// `2^s` in the working scalar, exact for every representable power.
#[inline]
pub(crate) fn pow2<F: Real>(s: u32) -> F {
    F::from_f64(2f64.powi(s as i32)).expect("power of two representable")
}
