//! Scalar abstractions.
//!
//! Everything in this crate is generic over [`Scalar`] (exact field arithmetic plus an
//! ordering) or [`Real`] (adds `exp`/`ln` and a notion of working precision). `f32`,
//! `f64` and [`num_rational::BigRational`] are scalars out of the box; [`MpFloat`] is a
//! binary floating point type whose significand width is fixed at compile time.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, Sub, SubAssign};
use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};
use num_bigint::{BigInt, Sign};
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

/// Ordered field element with exact conversions from machine numbers.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialOrd
    + Num
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion used for diagnostics and tolerance bookkeeping.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_int(n: usize) -> Self {
        <Self as FromPrimitive>::from_u64(n as u64).expect("integer fits every scalar")
    }

    /// Converts a machine float. Panics on NaN or infinity.
    fn from_f64_exact(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite float")
    }

    /// Exact conversion of an arbitrary integer (subject to the scalar's precision).
    fn from_bigint(n: &BigInt) -> Self {
        let (sign, digits) = n.to_u32_digits();
        let radix = Self::from_f64_exact(4294967296.0);
        let mut acc = Self::zero();
        for d in digits.iter().rev() {
            acc = acc * radix.clone() + Self::from_f64_exact(*d as f64);
        }
        if sign == Sign::Minus {
            -acc
        } else {
            acc
        }
    }

    /// Strictly above zero. Unlike `Signed::is_positive`, false for `+0.0`.
    fn gt_zero(&self) -> bool {
        *self > Self::zero()
    }

    /// Strictly below zero. Unlike `Signed::is_negative`, false for `-0.0`.
    fn lt_zero(&self) -> bool {
        *self < Self::zero()
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }
}

impl<T> Scalar for T where
    T: Clone
        + fmt::Debug
        + PartialOrd
        + Num
        + Signed
        + FromPrimitive
        + ToPrimitive
        + Send
        + Sync
        + 'static
{
}

/// Floating point scalar with transcendental functions.
pub trait Real: Scalar + fmt::Display {
    /// Width of the significand in bits.
    const SIGNIFICAND_BITS: u32;

    fn exp(&self) -> Self;
    fn ln(&self) -> Self;

    /// Distance from one to the next representable value.
    fn epsilon() -> Self;

    /// Scientific notation with `digits` significant decimal digits.
    fn to_sci_string(&self, digits: usize) -> String;

    /// Parses a decimal literal, rounding once to the working precision.
    fn parse_decimal(s: &str) -> Option<Self>;

    fn sqrt(&self) -> Self;

    /// Default tolerance for relative comparisons of results that went through
    /// a few dozen arithmetic steps.
    fn working_tolerance() -> Self {
        let eps = Self::epsilon();
        // eps^(3/4): leaves a quarter of the digits for accumulated rounding.
        (eps.ln() * Self::from_f64_exact(0.75)).exp()
    }
}

impl Real for f64 {
    const SIGNIFICAND_BITS: u32 = 53;

    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn to_sci_string(&self, digits: usize) -> String {
        format!("{:.*e}", digits.saturating_sub(1), self)
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok().filter(|x: &f64| x.is_finite())
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
}

impl Real for f32 {
    const SIGNIFICAND_BITS: u32 = 24;

    fn exp(&self) -> Self {
        f32::exp(*self)
    }
    fn ln(&self) -> Self {
        f32::ln(*self)
    }
    fn epsilon() -> Self {
        f32::EPSILON
    }
    fn to_sci_string(&self, digits: usize) -> String {
        format!("{:.*e}", digits.saturating_sub(1), self)
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok().filter(|x: &f32| x.is_finite())
    }
    fn sqrt(&self) -> Self {
        f32::sqrt(*self)
    }
}

type Big = FBig<HalfEven, 2>;

/// Binary floating point number with a `BITS`-bit significand and an unbounded exponent.
///
/// Every value carries exactly `BITS` bits; each arithmetic operation rounds once
/// (round-half-even).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MpFloat<const BITS: usize>(Big);

impl<const BITS: usize> MpFloat<BITS> {
    fn wrap(x: Big) -> Self {
        if x.precision() == BITS {
            MpFloat(x)
        } else {
            MpFloat(x.with_precision(BITS).value())
        }
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, n: u32) -> Self {
        Self::wrap(self.0.powi(n.into()))
    }

    pub fn precision() -> usize {
        BITS
    }
}

impl<const BITS: usize> fmt::Debug for MpFloat<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_sci_string(24))
    }
}

impl<const BITS: usize> fmt::Display for MpFloat<BITS> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(30);
        f.write_str(&self.to_sci_string(digits))
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $assign_trait:ident, $assign_method:ident, $op:tt) => {
        impl<const BITS: usize> $trait for MpFloat<BITS> {
            type Output = Self;
            fn $method(self, rhs: Self) -> Self {
                Self::wrap(self.0 $op rhs.0)
            }
        }
        impl<'a, const BITS: usize> $trait<&'a MpFloat<BITS>> for &'a MpFloat<BITS> {
            type Output = MpFloat<BITS>;
            fn $method(self, rhs: &'a MpFloat<BITS>) -> MpFloat<BITS> {
                MpFloat::wrap(&self.0 $op &rhs.0)
            }
        }
        impl<const BITS: usize> $assign_trait for MpFloat<BITS> {
            fn $assign_method(&mut self, rhs: Self) {
                *self = Self::wrap(&self.0 $op rhs.0);
            }
        }
    };
}

forward_binop!(Add, add, AddAssign, add_assign, +);
forward_binop!(Sub, sub, SubAssign, sub_assign, -);
forward_binop!(Mul, mul, MulAssign, mul_assign, *);
forward_binop!(Div, div, DivAssign, div_assign, /);

impl<const BITS: usize> Rem for MpFloat<BITS> {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        let q = Self::wrap((&self.0 / &rhs.0).trunc());
        self - q * rhs
    }
}

impl<const BITS: usize> Neg for MpFloat<BITS> {
    type Output = Self;
    fn neg(self) -> Self {
        MpFloat(-self.0)
    }
}

impl<const BITS: usize> Zero for MpFloat<BITS> {
    fn zero() -> Self {
        Self::wrap(Big::ZERO)
    }
    fn is_zero(&self) -> bool {
        self.0.repr().is_zero()
    }
}

impl<const BITS: usize> One for MpFloat<BITS> {
    fn one() -> Self {
        Self::wrap(Big::ONE)
    }
}

impl<const BITS: usize> Num for MpFloat<BITS> {
    type FromStrRadixErr = ParseMpFloatError;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(ParseMpFloatError(s.to_owned()));
        }
        s.parse()
    }
}

impl<const BITS: usize> Signed for MpFloat<BITS> {
    fn abs(&self) -> Self {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn abs_sub(&self, other: &Self) -> Self {
        if self <= other {
            Self::zero()
        } else {
            self - other
        }
    }
    fn signum(&self) -> Self {
        match self.partial_cmp(&Self::zero()) {
            Some(Ordering::Greater) => Self::one(),
            Some(Ordering::Less) => -Self::one(),
            _ => Self::zero(),
        }
    }
    fn is_positive(&self) -> bool {
        self.0 > Big::ZERO
    }
    fn is_negative(&self) -> bool {
        self.0 < Big::ZERO
    }
}

impl<const BITS: usize> FromPrimitive for MpFloat<BITS> {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Self::wrap(Big::from(n)))
    }
    fn from_u64(n: u64) -> Option<Self> {
        Some(Self::wrap(Big::from(n)))
    }
    fn from_f64(x: f64) -> Option<Self> {
        Big::try_from(x).ok().map(Self::wrap)
    }
}

impl<const BITS: usize> ToPrimitive for MpFloat<BITS> {
    fn to_i64(&self) -> Option<i64> {
        i64::try_from(dashu_int::IBig::try_from(self.0.trunc()).ok()?).ok()
    }
    fn to_u64(&self) -> Option<u64> {
        u64::try_from(dashu_int::IBig::try_from(self.0.trunc()).ok()?).ok()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(self.0.to_f64().value())
    }
}

/// Error returned when a decimal literal cannot be parsed into an [`MpFloat`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseMpFloatError(pub String);

impl fmt::Display for ParseMpFloatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid decimal literal `{}`", self.0)
    }
}

impl std::error::Error for ParseMpFloatError {}

impl<const BITS: usize> FromStr for MpFloat<BITS> {
    type Err = ParseMpFloatError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let t = t.strip_prefix('+').unwrap_or(t);
        // dashu only accepts a lowercase exponent marker with an explicit mantissa digit.
        let normalized = t.replace('E', "e");
        let dec = DBig::from_str(&normalized).map_err(|_| ParseMpFloatError(s.to_owned()))?;
        Ok(Self::wrap(
            dec.with_base_and_precision::<2>(BITS).value().with_rounding(),
        ))
    }
}

impl<const BITS: usize> Real for MpFloat<BITS> {
    const SIGNIFICAND_BITS: u32 = BITS as u32;

    fn exp(&self) -> Self {
        Self::wrap(self.0.exp())
    }
    fn ln(&self) -> Self {
        Self::wrap(self.0.ln())
    }
    fn epsilon() -> Self {
        Self::wrap(Big::from_parts(1.into(), 1 - BITS as isize))
    }
    fn to_sci_string(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".to_owned();
        }
        let repr = self.0.repr();
        let sig: BigInt = repr.significand().to_string().parse().expect("integer literal");
        correctly_rounded_sci(&sig, repr.exponent() as i64, digits.max(1))
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.parse().ok()
    }
    fn sqrt(&self) -> Self {
        Self::wrap(self.0.nth_root(2))
    }
}

/// `sig · 2^exp2` rounded half-even to `digits` significant decimal digits, in the
/// `d.ddde±x` style with trailing zeros dropped.
fn correctly_rounded_sci(sig: &BigInt, exp2: i64, digits: usize) -> String {
    use num_integer::Integer;
    let negative = sig.sign() == Sign::Minus;
    let mag = sig.abs();
    let ten = BigInt::from(10u8);
    let upper = num_traits::pow(ten.clone(), digits);
    let lower = num_traits::pow(ten.clone(), digits - 1);
    // first guess at the decimal exponent; corrected below if off by one
    let mut e10 = ((mag.bits() as f64 - 1.0 + exp2 as f64) * std::f64::consts::LOG10_2).floor() as i64;
    let scaled = loop {
        let p = digits as i64 - 1 - e10;
        let (mut num, mut den) = (mag.clone(), BigInt::one());
        if exp2 >= 0 {
            num <<= exp2 as usize;
        } else {
            den <<= (-exp2) as usize;
        }
        let pow10 = num_traits::pow(ten.clone(), p.unsigned_abs() as usize);
        if p >= 0 {
            num *= pow10;
        } else {
            den *= pow10;
        }
        let (q, r) = num.div_rem(&den);
        let twice = r << 1usize;
        let n = match twice.cmp(&den) {
            Ordering::Greater => q + 1,
            Ordering::Equal if q.is_odd() => q + 1,
            _ => q,
        };
        if n >= upper {
            e10 += 1;
        } else if n < lower {
            e10 -= 1;
        } else {
            break n;
        }
    };
    let text = scaled.to_string();
    let text = text.trim_end_matches('0');
    let (head, tail) = text.split_at(1);
    let sign = if negative { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{e10}")
    } else {
        format!("{sign}{head}.{tail}e{e10}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M256 = MpFloat<256>;

    #[test]
    fn arithmetic_keeps_precision() {
        let third = M256::one() / M256::from_int(3);
        assert_eq!(third.0.precision(), 256);
        let back = third.clone() * M256::from_int(3);
        assert!((back - M256::one()).abs() < M256::epsilon() * M256::from_int(2));
    }

    #[test]
    fn decimal_round_trip_at_thirty_digits() {
        let x: M256 = "1.00299999999999999999999999999e-2".parse().unwrap();
        assert_eq!(x.to_sci_string(30), "1.00299999999999999999999999999e-2");
        let y: M256 = "-2.5E3".parse().unwrap();
        assert_eq!(y.to_f64_lossy(), -2500.0);
        assert!("abc".parse::<M256>().is_err());
    }

    #[test]
    fn exp_and_ln_are_inverse() {
        let x = M256::from_f64_exact(0.37);
        let err = (x.exp().ln() - x.clone()).abs();
        assert!(err < M256::epsilon() * M256::from_int(16));
    }

    #[test]
    fn epsilon_is_one_ulp() {
        let one = M256::one();
        assert!(one.clone() + M256::epsilon() > one);
        assert_eq!(one.clone() + M256::epsilon() / M256::from_int(4), one);
    }

    #[test]
    fn bigint_conversion_is_exact() {
        let n: BigInt = "123456789012345678901234567890".parse().unwrap();
        let x = M256::from_bigint(&n);
        assert_eq!(x.to_sci_string(30), "1.2345678901234567890123456789e29");
        assert_eq!(f64::from_bigint(&BigInt::from(-7)), -7.0);
    }

    #[test]
    fn decimal_output_rounds_half_even() {
        let f = |x: f64, d: usize| M256::from_f64_exact(x).to_sci_string(d);
        assert_eq!(f(0.5, 30), "5e-1");
        assert_eq!(f(1.0, 30), "1e0");
        assert_eq!(f(-2.5, 1), "-2e0");
        assert_eq!(f(3.5, 1), "4e0");
        assert_eq!(f(9.96, 2), "1e1");
        assert_eq!(f(1234.0, 2), "1.2e3");
        assert_eq!(f(0.1, 20), "1.0000000000000000555e-1");
    }

    #[test]
    fn decimal_output_is_within_half_a_unit() {
        // 1/3, 2/7, … printed to 30 digits must parse back within 0.5e-29 relative
        for (p, q) in [(1, 3), (2, 7), (22, 7), (1, 997), (123456, 7), (5, 3_000_000)] {
            let x = M256::from_int(p) / M256::from_int(q);
            let back: M256 = x.to_sci_string(30).parse().unwrap();
            let rel = ((back - x.clone()) / x).abs();
            assert!(rel <= M256::from_f64_exact(5.0e-30), "{p}/{q}");
        }
    }

    #[test]
    fn signed_helpers() {
        let x = M256::from_f64_exact(-1.5);
        assert!(x.is_negative());
        assert_eq!(x.abs(), M256::from_f64_exact(1.5));
        assert_eq!(x.signum(), -M256::one());
        assert!(M256::zero().is_zero());
        assert!(!M256::zero().is_negative());
        let r = M256::from_f64_exact(7.5) % M256::from_f64_exact(2.0);
        assert_eq!(r, M256::from_f64_exact(1.5));
    }
}
