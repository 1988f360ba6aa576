//! Scalar abstraction for the numeric core.
//!
//! Every model in this crate is generic over a real scalar so the same
//! algebra runs in `f32` or `f64`. The crate root exports `f64` aliases,
//! which is what the acceptance tolerances (down to 1e-12) assume.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, NumAssign, NumCast};

/// Real scalar used for amplitudes, angles, rates and times.
pub trait Scalar:
    Float + FloatConst + NumAssign + NumCast + Sum + Debug + Display + Send + Sync + 'static
{
    /// Conversion from an `f64` constant. Panics only if the value is not
    /// representable, which cannot happen for the finite constants used here.
    fn of(v: f64) -> Self {
        NumCast::from(v).expect("finite constant must be representable")
    }

    /// View as `f64`, used at sampling boundaries where integer counts are
    /// drawn (count distributions are parameterized in `f64`).
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
