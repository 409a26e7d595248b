//! Floating-point scalar abstraction.
//!
//! Every payoff, cumulative total and noise draw in the crate is generic over
//! [`Scalar`], which is implemented for `f32` and `f64`. The crate root exports
//! `f64` aliases for the common types.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::distributions::uniform::SampleUniform;

/// Real scalar used for payoffs and perturbations.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + SampleUniform + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for values the type cannot represent at all (never for f32/f64).
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
