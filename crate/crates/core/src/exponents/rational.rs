use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ExponentError;

/// Exact fraction backed by arbitrary precision integers.
///
/// The denominator is always positive and coprime to the numerator.
/// Division is only available through [`Rational::checked_div`] so a zero
/// divisor surfaces as an error instead of a panic.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self, ExponentError> {
        if den == 0 {
            return Err(ExponentError::DivisionByZero);
        }
        Ok(Rational(BigRational::new(BigInt::from(num), BigInt::from(den))))
    }

    pub fn int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn checked_div(&self, rhs: &Rational) -> Result<Rational, ExponentError> {
        if rhs.is_zero() {
            return Err(ExponentError::DivisionByZero);
        }
        Ok(Rational(&self.0 / &rhs.0))
    }

    pub fn recip(&self) -> Result<Rational, ExponentError> {
        Rational::one().checked_div(self)
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }

    /// Nearest `f64`; exact whenever the value is a dyadic fraction that fits.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Parses `a/b`, an integer, or a decimal (optionally with exponent)
    /// into the exact rational it denotes.
    pub fn parse_exact(text: &str) -> Result<Rational, ExponentError> {
        let s = text.trim();
        let bad = || ExponentError::Parse(text.to_string());
        if s.is_empty() {
            return Err(bad());
        }
        if let Some((a, b)) = s.split_once('/') {
            let num = BigInt::from_str(a.trim()).map_err(|_| bad())?;
            let den = BigInt::from_str(b.trim()).map_err(|_| bad())?;
            if den.is_zero() {
                return Err(ExponentError::DivisionByZero);
            }
            return Ok(Rational(BigRational::new(num, den)));
        }
        let (mantissa, exp) = match s.find(['e', 'E']) {
            Some(i) => {
                let e: i32 = s[i + 1..].parse().map_err(|_| bad())?;
                (&s[..i], e)
            }
            None => (s, 0),
        };
        let (neg, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let joined = format!("{int_part}{frac_part}");
        let mut num = BigInt::from_str(if joined.is_empty() { "0" } else { &joined }).map_err(|_| bad())?;
        if neg {
            num = -num;
        }
        let scale = exp - frac_part.len() as i32;
        let ten = BigInt::from(10u32);
        let value = if scale >= 0 {
            BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
        } else {
            BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
        };
        Ok(Rational(value))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ExponentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rational::parse_exact(s)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Rational::parse_exact(&s).map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// A rational exponent that may also be `+∞` (used for `q = ∞` or `p = ∞`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtendedRational {
    Finite(Rational),
    PositiveInfinity,
}

impl ExtendedRational {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtendedRational::Finite(r) => Some(r),
            ExtendedRational::PositiveInfinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedRational::PositiveInfinity)
    }

    /// `1/x`, with `1/∞ = 0`. Zero has no reciprocal here.
    pub fn recip(&self) -> Result<Rational, ExponentError> {
        match self {
            ExtendedRational::Finite(r) => r.recip(),
            ExtendedRational::PositiveInfinity => Ok(Rational::zero()),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtendedRational::Finite(r) => r.to_f64(),
            ExtendedRational::PositiveInfinity => f64::INFINITY,
        }
    }

    pub fn parse_exact(text: &str) -> Result<Self, ExponentError> {
        match text.trim() {
            "inf" | "infinity" | "∞" | "+inf" => Ok(ExtendedRational::PositiveInfinity),
            other => Rational::parse_exact(other).map(ExtendedRational::Finite),
        }
    }
}

impl From<Rational> for ExtendedRational {
    fn from(r: Rational) -> Self {
        ExtendedRational::Finite(r)
    }
}

impl PartialOrd for ExtendedRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtendedRational {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtendedRational::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), PositiveInfinity) => Ordering::Less,
            (PositiveInfinity, Finite(_)) => Ordering::Greater,
            (PositiveInfinity, PositiveInfinity) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtendedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedRational::Finite(r) => write!(f, "{r}"),
            ExtendedRational::PositiveInfinity => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtendedRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn normalizes_sign_and_gcd() {
        let x = r(6, -4);
        assert_eq!(x.to_string(), "-3/2");
        assert!(x.denom() > &BigInt::zero());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(r(1, 2).checked_div(&Rational::zero()), Err(ExponentError::DivisionByZero));
        assert!(Rational::new(1, 0).is_err());
        assert!(Rational::parse_exact("3/0").is_err());
    }

    #[test]
    fn decimal_parsing_is_exact() {
        assert_eq!(Rational::parse_exact("1.01").unwrap(), r(101, 100));
        assert_eq!(Rational::parse_exact("0.5").unwrap(), r(1, 2));
        assert_eq!(Rational::parse_exact("-2.25").unwrap(), r(-9, 4));
        assert_eq!(Rational::parse_exact("1e-3").unwrap(), r(1, 1000));
        assert_eq!(Rational::parse_exact("2.5E2").unwrap(), Rational::int(250));
        assert_eq!(Rational::parse_exact(" 1/2 ").unwrap(), r(1, 2));
        assert_eq!(Rational::parse_exact(".25").unwrap(), r(1, 4));
        assert!(Rational::parse_exact("abc").is_err());
        assert!(Rational::parse_exact("1.2.3").is_err());
        assert!(Rational::parse_exact("").is_err());
    }

    #[test]
    fn infinity_orders_above_everything() {
        let big = ExtendedRational::Finite(Rational::int(1_000_000_000));
        assert!(ExtendedRational::PositiveInfinity > big);
        assert_eq!(ExtendedRational::PositiveInfinity.recip().unwrap(), Rational::zero());
    }
}
