//! Scalar abstraction shared by the numerical layers.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar the geometry, operator and heat-kernel code is written against.
///
/// Implemented for `f32` and `f64`. Audits and reports work in `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the implemented types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(k: usize) -> Self {
        Self::from_usize(k).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn two() -> Self {
        Self::one() + Self::one()
    }

    #[inline]
    fn half() -> Self {
        Self::lit(0.5)
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip<T: Real>() -> f64 {
        T::lit(0.25).to_f64_lossy() + T::from_usize_lossy(3).to_f64_lossy()
    }

    #[test]
    fn literals_roundtrip_both_precisions() {
        assert_eq!(roundtrip::<f32>(), 3.25);
        assert_eq!(roundtrip::<f64>(), 3.25);
    }
}
