use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar type the numerical core is generic over.
///
/// Implemented for `f32` and `f64`. Grid functions, jets and matrices carry
/// `Complex<T>` values; nodes and tolerances are `T`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Debug
    + Display
    + LowerExp
    + Default
    + Sum
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("integer representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over the scalar type.
pub type Cx<T> = Complex<T>;

pub fn cx<T: Real>(re: T) -> Cx<T> {
    Complex::new(re, T::zero())
}

pub(crate) fn is_finite<T: Real>(z: Cx<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `n!` evaluated in the scalar type (overflows to infinity for large `n`).
pub fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * T::from_usize_lossy(k))
}

/// Binomial coefficient `C(n, k)` evaluated in the scalar type.
pub fn binomial<T: Real>(n: usize, k: usize) -> T {
    if k > n {
        return T::zero();
    }
    let k = k.min(n - k);
    (0..k).fold(T::one(), |acc, i| {
        acc * T::from_usize_lossy(n - i) / T::from_usize_lossy(i + 1)
    })
}
