//! Scalar abstraction. Every numeric kernel in this crate is generic over a
//! floating-point scalar so the same code serves `f32` and `f64`.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + Sum + FromStr + Display + LowerExp + Debug + Send + Sync + 'static
{
    fn of_usize(v: usize) -> Self {
        Self::from_usize(v).expect("usize converts to scalar")
    }

    fn of_f64(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar widens to f64")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + Sum + FromStr + Display + LowerExp + Debug + Send + Sync + 'static
{
}
