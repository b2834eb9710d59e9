//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! The production path runs in `f64`. The same code is instantiated with
//! [`twofloat::TwoFloat`] (about 31 significant decimal digits) when the
//! analysis oracles need more headroom than double precision offers, and with
//! `f32` where a cheap smoke run is enough.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use twofloat::TwoFloat;

/// Real floating point type usable by the contraction and analysis code.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync + 'static
{
    /// Approximate number of significant decimal digits carried by the type.
    const DIGITS: u32;

    /// Converts an `f64` constant, rounding to the nearest representable value.
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 constant is representable")
    }

    /// Unit round-off scale of the type.
    fn eps() -> Self {
        <Self as Float>::epsilon()
    }

    /// Lossy conversion back to `f64` for reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Converts between scalar types through `f64` unless a wider route exists.
    fn cast<U: Scalar>(self) -> U {
        U::of(self.as_f64())
    }
}

impl Scalar for f32 {
    const DIGITS: u32 = 7;
}

impl Scalar for f64 {
    const DIGITS: u32 = 15;
}

// `FromPrimitive::from_f64` and `Float::epsilon` of `TwoFloat` are unusable:
// the first truncates to an integer, the second returns `f64::MIN_POSITIVE`.
impl Scalar for TwoFloat {
    const DIGITS: u32 = 31;

    fn of(x: f64) -> Self {
        TwoFloat::from(x)
    }

    fn eps() -> Self {
        TwoFloat::from(f64::EPSILON * f64::EPSILON)
    }
}

/// Sum with Neumaier compensation. Used where many terms of one sign and wildly
/// different magnitudes are accumulated.
pub fn compensated_sum<T: Scalar, I: IntoIterator<Item = T>>(items: I) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for x in items {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp = comp + ((sum - t) + x);
        } else {
            comp = comp + ((x - t) + sum);
        }
        sum = t;
    }
    sum + comp
}
