//! Scalar abstraction for the real-valued parts of the engine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; constants are written in `f64`.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable")
    }

    fn from_count(value: u64) -> Self {
        Self::from_u64(value).expect("count representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
