//! Floating-point abstraction shared by the scalar kernels.

use core::fmt::{Debug, Display};
use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar the special-function and harmonic kernels are generic over.
///
/// Implemented for `f32` and `f64`. The solver layers (assembly, eigen and
/// scattering solves) run on `f64` only; see [`crate::Real64`].
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Euler–Mascheroni constant.
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    #[inline]
    fn from_int(k: i64) -> Self {
        Self::from_i64(k).expect("integer representable")
    }

    /// Largest magnitude the recurrences may reach before rescaling.
    fn rescale_threshold() -> Self {
        Self::max_value().sqrt()
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
