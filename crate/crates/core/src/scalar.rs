//! Scalar abstraction for the floating-point parts of the pipeline.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used for feature values, solver state and model parameters.
///
/// Implemented for `f32` and `f64`. Integer stages (residuals, histograms) stay
/// integral; conversion to `Real` happens only at normalization time.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + LowerExp
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from a count or small integer.
    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize representable as float")
    }

    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 representable")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).expect("float representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
