//! Scalar backends.
//!
//! Every computation is generic over [`Scalar`]. Two backends exist: exact
//! arbitrary-precision rationals ([`Rational`]) and binary floats (`f64`).
//! A scene commits to one of them; the type system keeps them from mixing.

use core::fmt::{Debug, Display};
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rational = BigRational;

/// Field operations plus the handful of conversions the geometry needs.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// `true` when arithmetic is exact and tolerances are ignored.
    const EXACT: bool;
    /// Short backend label used in reports.
    const BACKEND: &'static str;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact for rationals (binary expansion of the float).
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_zero(&self) -> bool;
    fn abs(&self) -> Self;
    /// Square root when representable in the backend.
    fn sqrt(&self) -> Option<Self>;
    /// Sign of the value as -1, 0 or 1.
    fn signum_i8(&self) -> i8;

    /// Zero test under the backend's tolerance policy.
    fn negligible(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.to_f64().abs_value() <= tol
        }
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }
}

/// `f64::abs` without relying on `std`.
pub(crate) trait AbsValue {
    fn abs_value(self) -> Self;
}

impl AbsValue for f64 {
    fn abs_value(self) -> f64 {
        if self < 0.0 {
            -self
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const BACKEND: &'static str = "float";

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs(&self) -> Self {
        self.abs_value()
    }
    fn sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| libm::sqrt(*self))
    }
    fn signum_i8(&self) -> i8 {
        if *self > 0.0 {
            1
        } else if *self < 0.0 {
            -1
        } else {
            0
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const BACKEND: &'static str = "rational";

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_f64(v: f64) -> Self {
        <BigRational as FromPrimitive>::from_f64(v).unwrap_or_else(Zero::zero)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        let root = BigRational::new(n, d);
        (&root * &root == *self).then_some(root)
    }
    fn signum_i8(&self) -> i8 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }
}

/// Parse `"p/q"`, `"p"` or a decimal literal into a scalar.
pub fn parse_scalar<S: Scalar>(text: &str) -> Option<S> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: i64 = num.trim().parse().ok()?;
        let den: i64 = den.trim().parse().ok()?;
        if den == 0 {
            return None;
        }
        return Some(S::from_ratio(num, den));
    }
    if let Ok(v) = text.parse::<i64>() {
        return Some(S::from_i64(v));
    }
    parse_decimal(text)
}

fn parse_decimal<S: Scalar>(text: &str) -> Option<S> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let negative = mantissa.starts_with('-');
    let mantissa = mantissa.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    if !S::EXACT {
        return text.parse::<f64>().ok().map(S::from_f64);
    }
    let mut value = S::zero();
    let ten = S::from_i64(10);
    for c in int_part.chars().chain(frac_part.chars()) {
        value = value * ten.clone() + S::from_i64(c as i64 - '0' as i64);
    }
    let shift = exponent - frac_part.len() as i32;
    for _ in 0..shift.unsigned_abs() {
        value = if shift > 0 { value * ten.clone() } else { value / ten.clone() };
    }
    Some(if negative { -value } else { value })
}

/// Tolerances applied on the float backend; ignored on the exact backend.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    /// Algebraic identities.
    pub algebraic: f64,
    /// Identities that involve finite differences.
    pub derivative: f64,
    /// `J² = -1` validation.
    pub structure: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { algebraic: 1e-9, derivative: 1e-6, structure: 1e-12 }
    }
}

impl Tolerance {
    /// Same tolerance for every identity class.
    pub fn uniform(tol: f64) -> Self {
        Tolerance { algebraic: tol, derivative: tol, structure: tol }
    }
}

#[cfg(test)]
mod tests {
    use super::{parse_scalar, Rational, Scalar};

    #[test]
    fn rational_sqrt_only_for_squares() {
        let q = Rational::from_ratio(9, 4);
        assert_eq!(Scalar::sqrt(&q), Some(Rational::from_ratio(3, 2)));
        assert_eq!(Scalar::sqrt(&Rational::from_i64(2)), None);
        assert_eq!(Scalar::sqrt(&Rational::from_i64(-4)), None);
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_scalar::<Rational>("-3/6"), Some(Rational::from_ratio(-1, 2)));
        assert_eq!(parse_scalar::<Rational>("0.25"), Some(Rational::from_ratio(1, 4)));
        assert_eq!(parse_scalar::<Rational>("1.5e2"), Some(Rational::from_i64(150)));
        assert_eq!(parse_scalar::<Rational>("2e-1"), Some(Rational::from_ratio(1, 5)));
        assert_eq!(parse_scalar::<f64>("1/4"), Some(0.25));
        assert_eq!(parse_scalar::<f64>("abc"), None);
        assert_eq!(parse_scalar::<Rational>("1/0"), None);
    }

    #[test]
    fn negligible_policy() {
        assert!(1e-12_f64.negligible(1e-9));
        assert!(!Scalar::negligible(&Rational::from_ratio(1, 1_000_000_000_000), 1e-3));
    }
}
