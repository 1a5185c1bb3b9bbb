//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar the transforms, norms and estimators are generic over.
///
/// Implemented for `f32` and `f64`. Haar weights stay exact rationals inside the
/// group model and are converted to `T` only at evaluation time.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Lossy conversion from `f64`.
    #[inline]
    fn of(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 is representable")
    }

    /// Conversion from a count or index.
    #[inline]
    fn of_usize(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("usize is representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `exp(2πi·num/den)` evaluated in double precision and rounded to `T`.
#[inline]
pub fn unit_root<T: Real>(num: u64, den: u64) -> Complex<T> {
    let k = num % den;
    let angle = 2.0 * std::f64::consts::PI * (k as f64) / (den as f64);
    let (s, c) = angle.sin_cos();
    Complex::new(T::of(c), T::of(s))
}

pub(crate) fn is_finite<T: Real>(z: &Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}
