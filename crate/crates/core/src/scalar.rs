use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Numeric type for distances, densities and tolerances.
///
/// Implemented for every type with the listed capabilities, in particular
/// `f32`, `f64` and `Ratio<i64>`.
pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// `num / den`, computed in `Self`.
    fn ratio(num: usize, den: usize) -> Self {
        Self::from_usize(num).expect("numerator representable")
            / Self::from_usize(den).expect("denominator representable")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// `2^{-m}`.
    fn pow2_neg(m: u32) -> Self {
        let two = Self::one() + Self::one();
        let mut v = Self::one();
        for _ in 0..m {
            v = v / two;
        }
        v
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl<T> Scalar for T where
    T: Num
        + Copy
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

/// Converts an `f64` into any scalar, going through a rational approximation
/// with denominator `2^40` for exact types.
pub fn from_f64<S: Scalar>(v: f64) -> Option<S> {
    if let Some(s) = S::from_f64(v) {
        return Some(s);
    }
    let den: i64 = 1 << 40;
    let num = (v * den as f64).round() as i64;
    Some(S::from_i64(num)? / S::from_i64(den)?)
}

/// Sum of a slice of scalars.
pub fn sum<S: Scalar>(xs: &[S]) -> S {
    xs.iter().fold(S::zero(), |a, &b| a + b)
}
