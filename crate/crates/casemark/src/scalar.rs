//! Scalar abstraction for the numeric core.
//!
//! All network math is generic over [`Scalar`] so the same code runs at f32
//! or f64 precision. The shipped simulator uses f64 (see the crate-root type
//! aliases): the model is tiny, and full precision keeps gradient checks and
//! reproducibility contracts free of tolerance ambiguity.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the network primitives: f32 or f64.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable")
    }

    /// Widens to f64 (lossless for f32/f64).
    fn f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
