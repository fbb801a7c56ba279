//! Arbitrary-precision rational numbers kept in lowest terms with a positive
//! denominator.
//!
//! Values small enough to fit comfortably in machine words (|numerator| and
//! denominator below 2^62) are stored inline and all arithmetic on them runs
//! in i128 without allocating; anything larger escalates to a heap-allocated
//! big rational and demotes back as soon as it fits again. The 2^62 bound
//! guarantees that cross products and their sums stay below 2^125, so the
//! inline path needs no overflow checks.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

const SMALL_LIMIT: i128 = 1 << 62;

#[derive(Clone, Debug)]
enum Repr {
    Small { num: i128, den: i128 },
    Big(Box<BigRational>),
}

/// Exact rational number. Construction always normalizes: lowest terms,
/// denominator positive.
#[derive(Clone, Debug)]
pub struct Rational(Repr);

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid digit in rational literal {0:?}")]
    InvalidDigit(String),
    #[error("zero denominator in rational literal {0:?}")]
    ZeroDenominator(String),
}

fn small_norm(num: i128, den: i128) -> Repr {
    debug_assert!(den != 0);
    let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
    let g = num.gcd(&den);
    if g > 1 {
        num /= g;
        den /= g;
    }
    if num.abs() < SMALL_LIMIT && den < SMALL_LIMIT {
        Repr::Small { num, den }
    } else {
        Repr::Big(Box::new(BigRational::new(num.into(), den.into())))
    }
}

fn big_norm(r: BigRational) -> Repr {
    if let (Some(num), Some(den)) = (r.numer().to_i128(), r.denom().to_i128()) {
        if num.checked_abs().is_some_and(|a| a < SMALL_LIMIT) && den < SMALL_LIMIT {
            return Repr::Small { num, den };
        }
    }
    Repr::Big(Box::new(r))
}

impl Rational {
    /// Builds `num/den`. Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "rational with zero denominator");
        Rational(small_norm(num as i128, den as i128))
    }

    pub fn from_int(v: i64) -> Self {
        Rational(Repr::Small { num: v as i128, den: 1 })
    }

    pub fn zero() -> Self {
        Rational(Repr::Small { num: 0, den: 1 })
    }

    pub fn one() -> Self {
        Rational(Repr::Small { num: 1, den: 1 })
    }

    pub fn is_zero(&self) -> bool {
        match &self.0 {
            Repr::Small { num, .. } => *num == 0,
            Repr::Big(r) => r.is_zero(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small { num, .. } => *num < 0,
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small { num, .. } => *num > 0,
            Repr::Big(r) => r.is_positive(),
        }
    }

    /// True when the value is an integer (denominator 1 after reduction).
    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small { den, .. } => *den == 1,
            Repr::Big(r) => r.is_integer(),
        }
    }

    fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small { num, den } => BigRational::new((*num).into(), (*den).into()),
            Repr::Big(r) => (**r).clone(),
        }
    }

    /// Largest integer not exceeding the value, e.g. floor(141/4) = 35,
    /// floor(-1/4) = -1.
    pub fn floor(&self) -> Rational {
        match &self.0 {
            Repr::Small { num, den } => Rational(Repr::Small { num: num.div_euclid(*den), den: 1 }),
            Repr::Big(r) => Rational(big_norm(r.floor())),
        }
    }

    /// Fractional part `self - self.floor()`, always in [0, 1):
    /// frac(9/4) = 1/4, frac(-1/4) = 3/4.
    pub fn frac(&self) -> Rational {
        match &self.0 {
            Repr::Small { num, den } => Rational(Repr::Small { num: num.rem_euclid(*den), den: *den }).normalized_frac(),
            Repr::Big(r) => Rational(big_norm(r.fract() + rational_big_adjust(r))),
        }
    }

    fn normalized_frac(self) -> Rational {
        match self.0 {
            Repr::Small { num: 0, .. } => Rational::zero(),
            other => Rational(other),
        }
    }

    pub fn abs(&self) -> Rational {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Rational {
        assert!(!self.is_zero(), "reciprocal of zero");
        match &self.0 {
            Repr::Small { num, den } => Rational(small_norm(*den, *num)),
            Repr::Big(r) => Rational(big_norm(r.recip())),
        }
    }

    /// Nearest double, rounding through a numerator/denominator division.
    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small { num, den } => *num as f64 / *den as f64,
            Repr::Big(r) => big_to_f64(r),
        }
    }

    /// Numerator and denominator when both fit in i128 (denominator > 0).
    pub fn to_i128_parts(&self) -> Option<(i128, i128)> {
        match &self.0 {
            Repr::Small { num, den } => Some((*num, *den)),
            Repr::Big(r) => Some((r.numer().to_i128()?, r.denom().to_i128()?)),
        }
    }

    /// The value as an i64 when it is an integer in range.
    pub fn to_integer(&self) -> Option<i64> {
        match self.to_i128_parts()? {
            (num, 1) => i64::try_from(num).ok(),
            _ => None,
        }
    }

    #[cfg(test)]
    fn is_small_repr(&self) -> bool {
        matches!(self.0, Repr::Small { .. })
    }
}

// `fract()` of num-rational keeps the sign of the value; shifting negative
// fractional parts up by one lands in [0, 1).
fn rational_big_adjust(r: &BigRational) -> BigRational {
    if r.fract().is_negative() {
        BigRational::new(1.into(), 1.into())
    } else {
        BigRational::zero()
    }
}

fn big_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Out-of-range components: scale both sides down until they fit.
    let bits = r.numer().bits().max(r.denom().bits());
    let shift = bits.saturating_sub(512);
    let num = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let den = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    num / den
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_int(v)
    }
}

impl From<i32> for Rational {
    fn from(v: i32) -> Self {
        Rational::from_int(v as i64)
    }
}

fn add_impl(a: &Rational, b: &Rational) -> Rational {
    match (&a.0, &b.0) {
        (Repr::Small { num: n1, den: d1 }, Repr::Small { num: n2, den: d2 }) => {
            Rational(small_norm(n1 * d2 + n2 * d1, d1 * d2))
        }
        _ => Rational(big_norm(a.to_big() + b.to_big())),
    }
}

fn sub_impl(a: &Rational, b: &Rational) -> Rational {
    match (&a.0, &b.0) {
        (Repr::Small { num: n1, den: d1 }, Repr::Small { num: n2, den: d2 }) => {
            Rational(small_norm(n1 * d2 - n2 * d1, d1 * d2))
        }
        _ => Rational(big_norm(a.to_big() - b.to_big())),
    }
}

fn mul_impl(a: &Rational, b: &Rational) -> Rational {
    match (&a.0, &b.0) {
        (Repr::Small { num: n1, den: d1 }, Repr::Small { num: n2, den: d2 }) => {
            // Cross-reduce first so intermediates stay small.
            let g1 = n1.gcd(d2);
            let g2 = n2.gcd(d1);
            Rational(small_norm((n1 / g1) * (n2 / g2), (d1 / g2) * (d2 / g1)))
        }
        _ => Rational(big_norm(a.to_big() * b.to_big())),
    }
}

fn div_impl(a: &Rational, b: &Rational) -> Rational {
    assert!(!b.is_zero(), "rational division by zero");
    match (&a.0, &b.0) {
        (Repr::Small { num: n1, den: d1 }, Repr::Small { num: n2, den: d2 }) => {
            let g1 = n1.gcd(n2);
            let g2 = d2.gcd(d1);
            Rational(small_norm((n1 / g1) * (d2 / g2), (d1 / g2) * (n2 / g1)))
        }
        _ => Rational(big_norm(a.to_big() / b.to_big())),
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $impl_fn:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $impl_fn(&self, &rhs)
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                $impl_fn(&self, rhs)
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                $impl_fn(self, &rhs)
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                $impl_fn(self, rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_impl);
forward_binop!(Sub, sub, sub_impl);
forward_binop!(Mul, mul, mul_impl);
forward_binop!(Div, div, div_impl);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = add_impl(self, rhs);
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = add_impl(self, &rhs);
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        *self = sub_impl(self, rhs);
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        *self = sub_impl(self, &rhs);
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        *self = mul_impl(self, rhs);
    }
}

impl MulAssign for Rational {
    fn mul_assign(&mut self, rhs: Rational) {
        *self = mul_impl(self, &rhs);
    }
}

impl DivAssign<&Rational> for Rational {
    fn div_assign(&mut self, rhs: &Rational) {
        *self = div_impl(self, rhs);
    }
}

impl DivAssign for Rational {
    fn div_assign(&mut self, rhs: Rational) {
        *self = div_impl(self, &rhs);
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small { num, den } => Rational(Repr::Small { num: -num, den: *den }),
            Repr::Big(r) => Rational(big_norm(-(**r).clone())),
        }
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |mut acc, v| {
            acc += v;
            acc
        })
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |mut acc, v| {
            acc += v;
            acc
        })
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Rational {}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small { num: n1, den: d1 }, Repr::Small { num: n2, den: d2 }) => {
                (n1 * d2).cmp(&(n2 * d1))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { num, den } => {
                if *den == 1 {
                    write!(f, "{num}")
                } else {
                    write!(f, "{num}/{den}")
                }
            }
            Repr::Big(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
        }
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        let (num_str, den_str) = match s.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (s, None),
        };
        let parse_part = |part: &str| -> Result<BigInt, ParseRationalError> {
            if part.is_empty() {
                return Err(ParseRationalError::Empty);
            }
            part.parse::<BigInt>()
                .map_err(|_| ParseRationalError::InvalidDigit(s.to_string()))
        };
        if let (Ok(n), Ok(d)) = (
            num_str.parse::<i128>(),
            den_str.map_or(Ok(1i128), |d| d.parse::<i128>()),
        ) {
            if d == 0 {
                return Err(ParseRationalError::ZeroDenominator(s.to_string()));
            }
            let fits = |v: i128| v.checked_abs().is_some_and(|a| a < SMALL_LIMIT);
            if fits(n) && fits(d) {
                return Ok(Rational(small_norm(n, d)));
            }
        }
        let num = parse_part(num_str)?;
        let den = match den_str {
            Some(d) => parse_part(d)?,
            None => BigInt::from(1),
        };
        if den.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        Ok(Rational(big_norm(BigRational::new(num, den))))
    }
}

impl serde::Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Rational;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational encoded as \"p\" or \"p/q\"")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }
        }
        deserializer.deserialize_str(V)
    }
}

/// Exact dot product of two equal-length slices.
pub fn dot(xs: &[Rational], ys: &[Rational]) -> Rational {
    debug_assert_eq!(xs.len(), ys.len());
    let mut acc = Rational::zero();
    for (x, y) in xs.iter().zip(ys) {
        if !x.is_zero() && !y.is_zero() {
            acc += x * y;
        }
    }
    acc
}
