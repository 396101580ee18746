//! Exact dyadic-scaled rationals.
//!
//! A [`Scalar`] is `ratio * 2^exp2` with `ratio` reduced so that numerator
//! and denominator are both odd. Weight products such as `2^(10^5)` then cost
//! one machine word instead of a hundred-thousand-bit integer.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Scalar {
    ratio: BigRational,
    exp2: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse scalar from {0:?}")]
pub struct ParseScalarError(pub String);

fn split_twos(n: &BigInt) -> (BigInt, i64) {
    match n.trailing_zeros() {
        Some(tz) if tz > 0 => (n >> tz, tz as i64),
        _ => (n.clone(), 0),
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { ratio: BigRational::zero(), exp2: 0 }
    }

    pub fn one() -> Self {
        Scalar { ratio: BigRational::one(), exp2: 0 }
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Scalar { ratio: BigRational::one(), exp2: e }
    }

    pub fn from_integer<T: Into<BigInt>>(n: T) -> Self {
        Self::from_ratio(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(r: BigRational) -> Self {
        Self::from_parts(r, 0)
    }

    /// `num / den * 2^exp2`; `den` must be nonzero.
    pub fn from_fraction(num: BigInt, den: BigInt, exp2: i64) -> Self {
        Self::from_parts(BigRational::new(num, den), exp2)
    }

    /// `base^e` computed exactly; powers of two stay in the exponent.
    pub fn int_pow(base: u32, e: u64) -> Self {
        if base.is_power_of_two() {
            let shift = base.trailing_zeros() as i64;
            return Scalar::pow2(shift * e as i64);
        }
        let mut acc = Scalar::one();
        let mut sq = Scalar::from_integer(base);
        let mut k = e;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &sq;
            }
            sq = &sq * &sq;
            k >>= 1;
        }
        acc
    }

    fn from_parts(r: BigRational, exp2: i64) -> Self {
        if r.is_zero() {
            return Scalar::zero();
        }
        let (n, en) = split_twos(r.numer());
        let (d, ed) = split_twos(r.denom());
        Scalar { ratio: BigRational::new_raw(n, d), exp2: exp2 + en - ed }
    }

    pub fn is_zero(&self) -> bool {
        self.ratio.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.ratio.is_negative()
    }

    pub fn abs(&self) -> Self {
        Scalar { ratio: self.ratio.abs(), exp2: self.exp2 }
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Scalar { ratio: self.ratio.recip(), exp2: -self.exp2 }
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Scalar::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Odd numerator, odd denominator and binary exponent.
    pub fn parts(&self) -> (&BigInt, &BigInt, i64) {
        (self.ratio.numer(), self.ratio.denom(), self.exp2)
    }

    pub fn exp2(&self) -> i64 {
        self.exp2
    }

    /// Bits needed by the mantissa; used for precision budgets.
    pub fn mantissa_bits(&self) -> u64 {
        self.ratio.numer().bits() + self.ratio.denom().bits()
    }

    /// Exact value as a rational. Only sensible for moderate exponents.
    pub fn to_rational(&self) -> BigRational {
        let mut r = self.ratio.clone();
        if self.exp2 >= 0 {
            r *= BigRational::from_integer(BigInt::one() << self.exp2 as usize);
        } else {
            r /= BigRational::from_integer(BigInt::one() << (-self.exp2) as usize);
        }
        r
    }

    /// Approximate `log2(|self|)`; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        big_log2(&self.ratio.numer().magnitude().clone())
            - big_log2(&self.ratio.denom().magnitude().clone())
            + self.exp2 as f64
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let sign = if self.is_negative() { -1.0 } else { 1.0 };
        let l = self.log2_abs();
        if l > 1100.0 {
            return sign * f64::INFINITY;
        }
        if l < -1100.0 {
            return sign * 0.0;
        }
        let m = self.ratio.to_f64().unwrap_or_else(|| sign * l.exp2());
        if m.is_finite() && m != 0.0 {
            m * (self.exp2 as f64).exp2()
        } else {
            sign * l.exp2()
        }
    }

    /// Aligns two values to a common exponent; returns mantissa numerators
    /// over a shared denominator.
    fn aligned(&self, other: &Self) -> (BigInt, BigInt, BigInt, i64) {
        let e = self.exp2.min(other.exp2);
        let a = self.ratio.numer() * other.ratio.denom();
        let b = other.ratio.numer() * self.ratio.denom();
        let den = self.ratio.denom() * other.ratio.denom();
        let a = a << (self.exp2 - e) as usize;
        let b = b << (other.exp2 - e) as usize;
        (a, b, den, e)
    }
}

fn big_log2(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 60 {
        return n.to_f64().unwrap().log2();
    }
    let shift = bits - 60;
    let top: BigUint = n >> shift;
    top.to_f64().unwrap().log2() + shift as f64
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.ratio.numer().sign(), other.ratio.numer().sign());
        let rank = |s: Sign| match s {
            Sign::Minus => 0,
            Sign::NoSign => 1,
            Sign::Plus => 2,
        };
        if sa != sb {
            return rank(sa).cmp(&rank(sb));
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        // Cheap magnitude comparison before exact alignment.
        let (la, lb) = (self.log2_abs(), other.log2_abs());
        if (la - lb).abs() > 4.0 {
            let mag = la.partial_cmp(&lb).unwrap();
            return if sa == Sign::Plus { mag } else { mag.reverse() };
        }
        let (a, b, _, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        if self.is_zero() || rhs.is_zero() {
            return Scalar::zero();
        }
        let exp2 = self.exp2 + rhs.exp2;
        if self.ratio.is_one() {
            return Scalar { ratio: rhs.ratio.clone(), exp2 };
        }
        if rhs.ratio.is_one() {
            return Scalar { ratio: self.ratio.clone(), exp2 };
        }
        // Both mantissas are odd/odd, so the product is too.
        Scalar { ratio: &self.ratio * &rhs.ratio, exp2 }
    }
}

impl<'a> Div<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &Scalar) -> Scalar {
        self * &rhs.recip()
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let (a, b, den, e) = self.aligned(rhs);
        Scalar::from_fraction(a + b, den, e)
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        self + &(-rhs)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { ratio: -self.ratio.clone(), exp2: self.exp2 }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_integer(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::from_ratio(r)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        if self.exp2.abs() <= 64 {
            let r = self.to_rational();
            if r.is_integer() {
                write!(f, "{}", r.numer())
            } else {
                write!(f, "{}/{}", r.numer(), r.denom())
            }
        } else if self.ratio.is_integer() {
            write!(f, "{}*2^{}", self.ratio.numer(), self.exp2)
        } else {
            write!(f, "{}/{}*2^{}", self.ratio.numer(), self.ratio.denom(), self.exp2)
        }
    }
}

/// Parses exact decimal and rational literals: `3`, `-7/4`, `0.001`,
/// `1e-3`, `2^10`, `2^-5`.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseScalarError> {
    let err = || ParseScalarError(s.to_string());
    let t = s.trim();
    if let Some((num, den)) = t.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(den.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((base, e)) = t.split_once('^') {
        let b = BigInt::from_str(base.trim()).map_err(|_| err())?;
        let e: i32 = e.trim().parse().map_err(|_| err())?;
        if b.is_zero() && e < 0 {
            return Err(err());
        }
        let p = num_traits::pow(b, e.unsigned_abs() as usize);
        let r = BigRational::from_integer(p);
        return Ok(if e < 0 { r.recip() } else { r });
    }
    let (mant, exp10) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut n = BigInt::from_str(&digits).map_err(|_| err())?;
    if neg {
        n = -n;
    }
    let scale = exp10 - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let r = BigRational::from_integer(n);
    Ok(if scale >= 0 {
        r * BigRational::from_integer(num_traits::pow(ten, scale as usize))
    } else {
        r / BigRational::from_integer(num_traits::pow(ten, (-scale) as usize))
    })
}

impl FromStr for Scalar {
    type Err = ParseScalarError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_rational(s).map(Scalar::from_ratio)
    }
}

/// Wire form `[numerator, denominator, exp2]`; big integers travel as
/// decimal strings when they exceed `i64`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Small(i64),
    Big(String),
}

impl IntRepr {
    fn from_big(n: &BigInt) -> Self {
        n.to_i64().map(IntRepr::Small).unwrap_or_else(|| IntRepr::Big(n.to_string()))
    }
    fn to_big(&self) -> Result<BigInt, String> {
        match self {
            IntRepr::Small(v) => Ok(BigInt::from(*v)),
            IntRepr::Big(s) => BigInt::from_str(s).map_err(|e| e.to_string()),
        }
    }
}

impl Scalar {
    pub(crate) fn to_wire(&self) -> (serde_json::Value, serde_json::Value, i64) {
        let n = serde_json::to_value(IntRepr::from_big(self.ratio.numer())).unwrap();
        let d = serde_json::to_value(IntRepr::from_big(self.ratio.denom())).unwrap();
        (n, d, self.exp2)
    }

    pub(crate) fn from_wire(
        n: &serde_json::Value,
        d: &serde_json::Value,
        exp2: i64,
    ) -> Result<Self, String> {
        let n: IntRepr = serde_json::from_value(n.clone()).map_err(|e| e.to_string())?;
        let d: IntRepr = serde_json::from_value(d.clone()).map_err(|e| e.to_string())?;
        let (n, d) = (n.to_big()?, d.to_big()?);
        if d.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(Scalar::from_fraction(n, d, exp2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Scalar {
        x.parse().unwrap()
    }

    #[test]
    fn normalizes_powers_of_two() {
        let a = s("12");
        assert_eq!(a.parts().2, 2);
        assert_eq!(a, &Scalar::from_integer(3) * &Scalar::pow2(2));
        assert_eq!(s("3/8"), Scalar::from_fraction(3.into(), 1.into(), -3));
    }

    #[test]
    fn arithmetic_matches_rationals() {
        let a = s("5/6");
        let b = s("-7/20");
        assert_eq!((&a + &b).to_rational(), parse_rational("29/60").unwrap());
        assert_eq!((&a * &b).to_rational(), parse_rational("-7/24").unwrap());
        assert_eq!((&a / &b).to_rational(), parse_rational("-50/21").unwrap());
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn ordering_handles_huge_exponents() {
        let big = Scalar::pow2(100_000);
        let bigger = &big * &s("3");
        assert!(bigger > big);
        assert!(Scalar::pow2(-100_000) < s("1/1000000"));
        assert!(-&big < Scalar::zero());
        assert!(s("3/4") > s("2/3"));
    }

    #[test]
    fn parses_decimal_forms() {
        assert_eq!(s("0.001"), s("1/1000"));
        assert_eq!(s("1e-3"), s("1/1000"));
        assert_eq!(s("2^-5"), Scalar::pow2(-5));
        assert_eq!(s("-2.5"), s("-5/2"));
        assert!("abc".parse::<Scalar>().is_err());
        assert!("1/0".parse::<Scalar>().is_err());
    }

    #[test]
    fn int_pow_and_display() {
        assert_eq!(Scalar::int_pow(3, 4), s("81"));
        assert_eq!(Scalar::int_pow(4, 3), Scalar::pow2(6));
        assert_eq!(s("-7/4").to_string(), "-7/4");
        assert_eq!(Scalar::pow2(100).to_string(), "1*2^100");
        assert!((s("1/3").to_f64() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(Scalar::pow2(2000).to_f64(), f64::INFINITY);
    }
}
