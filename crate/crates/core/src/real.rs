use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Scalar type for objective values, weights, and probabilities.
///
/// All library code is generic over this trait; `f64` is the default used by
/// the CLI and the concrete aliases at the crate root. `f32` works too, at
/// correspondingly looser tolerances.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum<Self>
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`, for numeric literals in generic code.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Lossy conversion to `f64`, for reporting and serialization.
    fn to64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }

    /// Absolute comparison tolerance for invariant checks.
    ///
    /// 1e-9 for f64; widened for scalar types with a coarser epsilon.
    fn tol() -> Self {
        Self::of(1e-9).max(Self::epsilon() * Self::of(64.0))
    }
}

impl<T> Real for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + NumAssign
        + Sum<T>
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}
