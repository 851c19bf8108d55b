//! Scalar abstraction over the two arithmetic modes: exact rationals and `f64`.
//!
//! All construction and norm machinery is generic over [`Scalar`], so the same
//! code path runs bit-exactly on `BigRational` (identity tests, small stages)
//! and fast on `f64` (large stages, growth experiments).

use core::fmt;
use core::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive};

/// A field scalar usable as a coordinate value.
///
/// Implemented for `f64` (float64 mode) and [`BigRational`] (exact-rational
/// mode). Arithmetic goes through the `num_traits` operator bounds; the few
/// extra hooks here cover construction from integer ratios, conversion to
/// `f64` for reports and fits, and mode introspection.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Num
    + Signed
    + Neg<Output = Self>
    + Send
    + Sync
{
    /// True when arithmetic in this mode is exact (no rounding).
    const EXACT: bool;

    /// Mode name used in serialized params.
    const MODE_NAME: &'static str;

    fn from_int(n: i64) -> Self;

    /// Exact ratio `num/den`, `den > 0`.
    fn from_ratio(num: i64, den: u64) -> Self;

    /// Lossy conversion for reports, fits, and thresholds.
    fn to_f64(&self) -> f64;

    /// False only for non-finite floats; rationals are always finite.
    fn is_finite_scalar(&self) -> bool;
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const MODE_NAME: &'static str = "float64";

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(num: i64, den: u64) -> Self {
        num as f64 / den as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite_scalar(&self) -> bool {
        self.is_finite()
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    const MODE_NAME: &'static str = "exact-rational";

    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_finite_scalar(&self) -> bool {
        true
    }
}

/// Max of absolute values of a coordinate slice; zero for the empty slice.
/// Exact in rational mode.
pub fn sup_norm<S: Scalar>(coords: &[S]) -> S {
    let mut best = S::zero();
    for c in coords {
        let a = c.abs();
        if a > best {
            best = a;
        }
    }
    best
}

/// Sum of squares of a coordinate slice. Exact in rational mode.
pub fn sq_norm<S: Scalar>(coords: &[S]) -> S {
    let mut acc = S::zero();
    for c in coords {
        acc = acc + c.clone() * c.clone();
    }
    acc
}
