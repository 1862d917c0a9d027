//! Scalar abstractions.
//!
//! Spectral and thermodynamic routines are generic over [`Real`] (`f32`, `f64`).
//! Purely algebraic routines on level energies, such as crossing detection,
//! only need [`Field`], which is also implemented for exact rationals.

use std::cmp::Ordering;
use std::fmt::{Debug, Display, LowerExp};
use std::ops::Neg;

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, ToPrimitive};

/// Ordered field of level energies: exact (rational) or floating point.
pub trait Field: Clone + PartialOrd + Num + Neg<Output = Self> + Debug + Display {
    /// Sign of `value`, where floating-point magnitudes at roundoff level
    /// relative to `scale` count as zero. Exact types compare exactly.
    fn sign_with_slack(value: &Self, scale: &Self) -> Ordering;

    fn approx_f64(&self) -> f64;

    fn from_f64_lossy(x: f64) -> Option<Self>;
}

macro_rules! float_field {
    ($t:ty) => {
        impl Field for $t {
            fn sign_with_slack(value: &Self, scale: &Self) -> Ordering {
                let slack = 64.0 * <$t>::EPSILON * scale.abs().max(1.0);
                if value.abs() <= slack {
                    Ordering::Equal
                } else if *value > 0.0 {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }

            fn approx_f64(&self) -> f64 {
                *self as f64
            }

            fn from_f64_lossy(x: f64) -> Option<Self> {
                x.is_finite().then_some(x as $t)
            }
        }
    };
}

float_field!(f32);
float_field!(f64);

impl Field for Ratio<i64> {
    fn sign_with_slack(value: &Self, _scale: &Self) -> Ordering {
        value.cmp(&Ratio::from_integer(0))
    }

    fn approx_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64_lossy(x: f64) -> Option<Self> {
        Ratio::approximate_float(x)
    }
}

/// Floating-point scalar used by every spectral routine.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Field
    + Default
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Literal conversion, `T::lit(0.5)`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// A tolerance stated for `f64` work, widened to the precision of `Self`.
    fn tol(x: f64) -> Self {
        Self::lit(x).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}
