//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the detector math is written against: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the IEEE types this is implemented for.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    /// Lossy widening used for error payloads and reporting.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Clamps a requested absolute tolerance to something the type can resolve.
    ///
    /// Asking an `f32` solver for `1e-10` would never terminate on the residual
    /// test, so the tolerance is floored at a small multiple of machine epsilon.
    fn tolerance(requested: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(64.0);
        let requested = Self::lit(requested);
        if requested < floor {
            floor
        } else {
            requested
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_is_floored_for_f32() {
        assert_eq!(f64::tolerance(1e-10), 1e-10);
        assert!(f32::tolerance(1e-10) > 1e-10);
        assert!(f32::tolerance(1e-10) < 1e-4);
    }
}
