//! Scalar abstraction shared by every numeric kernel in the crate.

use std::iter::Sum;

use ndarray::NdFloat;
use num_traits::FromPrimitive;

/// Floating-point scalar usable by the solvers: `f32` or `f64`.
///
/// The tolerances used throughout the crate (bisection to 1e-10, gradient
/// checks at 1e-6) assume `f64`; `f32` compiles and runs but only makes
/// sense with correspondingly loose tolerances.
pub trait Real: NdFloat + FromPrimitive + Sum {
    /// Converts an `f64` literal into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl<T> Real for T where T: NdFloat + FromPrimitive + Sum {}
