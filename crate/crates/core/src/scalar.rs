//! Scalar abstraction: every numeric kernel in this crate is generic over the
//! floating-point type through [`Scalar`]. Concrete aliases for the common
//! instantiations live at the crate root.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use rustfft::FftNum;

/// Floating-point scalar usable by all grid, transform, and network kernels.
///
/// Implemented for `f32` and `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + FftNum + Display + LowerExp + Debug
{
    /// Lossy conversion from `f64`, for constants baked into algorithms.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    /// Lossy conversion from `usize` (grid sizes, counts).
    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize fits scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
