//! Field abstraction shared by the exact (rational) and floating-point paths.

use core::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Arbitrary-precision rational number used for exact identities.
pub type Rational = num_rational::BigRational;

/// Ordered field used by coefficient generation and banded operator algebra.
///
/// Implemented for `f64` (operator work at large `N`) and [`Rational`]
/// (identities that must hold exactly, such as a zero deflation remainder).
pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed + FromPrimitive + ToPrimitive {
    /// `true` when arithmetic is exact and "zero" means exactly zero.
    const EXACT: bool;

    fn from_int(n: i64) -> Self;

    fn from_ratio(numer: i64, denom: i64) -> Self;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Zero test: exact for rationals, `|x| <= 1e-13 * max(1, scale)` for floats.
    fn is_negligible(&self, scale: &Self) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            let s = scale.to_f64_lossy().abs().max(1.0);
            self.to_f64_lossy().abs() <= 1e-13 * s
        }
    }

    fn is_positive_finite(&self) -> bool {
        let x = self.to_f64_lossy();
        self.is_positive() && x.is_finite()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(n: i64) -> Self {
        n as f64
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }

    fn is_positive_finite(&self) -> bool {
        *self > 0.0 && self.is_finite()
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_int(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Rational::new(BigInt::from(numer), BigInt::from(denom))
    }

    fn is_positive_finite(&self) -> bool {
        self.is_positive()
    }
}

/// Converts an exact rational to the nearest representable double.
pub fn rational_to_f64(x: &Rational) -> f64 {
    x.to_f64_lossy()
}

/// Exact rational value of a finite double; `None` for NaN or infinities.
pub fn f64_to_rational(x: f64) -> Option<Rational> {
    Rational::from_f64(x)
}
