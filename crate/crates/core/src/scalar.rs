//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type usable by the angle, rule and simulation code: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an integer count.
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("u64 is representable in every float type")
    }

    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal is representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `x mod 1` reduced into `[0, 1)`.
pub(crate) fn frac<T: Real>(x: T) -> T {
    let r = x - x.floor();
    // floor can leave exactly 1.0 for tiny negative inputs
    if r >= T::one() {
        T::zero()
    } else {
        r
    }
}

/// Circle metric on `R/Z`.
pub fn circle_distance<T: Real>(a: T, b: T) -> T {
    let d = frac(a - b);
    d.min(T::one() - d)
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<T: Real>(xs: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for x in xs {
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
