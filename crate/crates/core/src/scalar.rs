//! Scalar fields the library runs over.
//!
//! Every formula in the crate is polynomial or real-linear in its inputs, so
//! the same code runs over exact rationals (used as the test oracle) and
//! over IEEE floats. Complex quantities are `num_complex::Complex<T>`; for
//! `T = BigRational` these are Gaussian rationals.

use std::fmt::Debug;
use std::ops::Neg;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An ordered field, either exact or floating point.
pub trait Scalar: Clone + Debug + PartialEq + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static {
    /// True when arithmetic is exact and `is_negligible` means `== 0`.
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Converts a finite float; rationals take the shortest decimal that
    /// round-trips, so `0.3` becomes `3/10`.
    fn from_f64(v: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    fn floor(&self) -> Self;

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn is_finite(&self) -> bool;

    /// Absolute tolerance for zero tests; zero in exact mode.
    fn tolerance() -> Self;

    fn is_negligible(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    /// Nearest integer, when `self` is within tolerance of one.
    fn as_integer(&self) -> Option<i64> {
        let half = Self::one() / Self::from_i64(2);
        let nearest = (self.clone() + half).floor();
        if (self.clone() - nearest.clone()).is_negligible() {
            nearest.to_f64().round().to_i64()
        } else {
            None
        }
    }

    fn parse(text: &str) -> Result<Self>;

    fn to_json(&self) -> serde_json::Value;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_f64(v: f64) -> Option<Self> {
        v.is_finite().then_some(v)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn floor(&self) -> Self {
        f64::floor(*self)
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn tolerance() -> Self {
        1e-9
    }

    fn parse(text: &str) -> Result<Self> {
        parse_rational(text).map(|q| ratio_to_f64(&q))
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(*self)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f32
    }

    fn from_f64(v: f64) -> Option<Self> {
        let v = v as f32;
        v.is_finite().then_some(v)
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn floor(&self) -> Self {
        f32::floor(*self)
    }

    fn is_finite(&self) -> bool {
        f32::is_finite(*self)
    }

    fn tolerance() -> Self {
        1e-5
    }

    fn parse(text: &str) -> Result<Self> {
        parse_rational(text).map(|q| ratio_to_f64(&q) as f32)
    }

    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(*self as f64)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        parse_rational(&format!("{v:?}")).ok()
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn floor(&self) -> Self {
        num_rational::Ratio::floor(self)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn tolerance() -> Self {
        BigRational::zero()
    }

    fn is_negligible(&self) -> bool {
        self.is_zero()
    }

    fn as_integer(&self) -> Option<i64> {
        if self.is_integer() {
            self.to_integer().to_i64()
        } else {
            None
        }
    }

    fn parse(text: &str) -> Result<Self> {
        parse_rational(text)
    }

    fn to_json(&self) -> serde_json::Value {
        if self.is_integer() {
            if let Some(v) = self.to_integer().to_i64() {
                return serde_json::json!(v);
            }
        }
        serde_json::Value::String(format!("{}/{}", self.numer(), self.denom()))
    }
}

fn ratio_to_f64(q: &BigRational) -> f64 {
    ToPrimitive::to_f64(q).unwrap_or_else(|| {
        // ToPrimitive can give up on very large numerators; scale down.
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parses `"p/q"`, integers and decimal literals (with optional exponent)
/// into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::Parse(format!("not a number: {text:?}"));
    if text.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = text.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = text[pos + 1..].parse().map_err(|_| bad())?;
            (&text[..pos], e)
        }
        None => (text, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let numer = BigInt::from_str(&all_digits).map_err(|_| bad())? * BigInt::from(sign);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let q = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(q)
}

pub fn complex_is_negligible<T: Scalar>(z: &Complex<T>) -> bool {
    z.re.is_negligible() && z.im.is_negligible()
}

pub fn complex_is_finite<T: Scalar>(z: &Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub fn complex_from_f64<T: Scalar>(z: Complex<f64>) -> Option<Complex<T>> {
    Some(Complex::new(T::from_f64(z.re)?, T::from_f64(z.im)?))
}

pub fn complex_to_f64<T: Scalar>(z: &Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

/// Real part of `z * conj(w)`.
pub fn re_mul_conj<T: Scalar>(z: &Complex<T>, w: &Complex<T>) -> T {
    z.re.clone() * w.re.clone() + z.im.clone() * w.im.clone()
}

pub fn is_real_negative<T: Scalar>(x: &T) -> bool {
    *x < T::zero()
}

/// Parses `"re,im"` (or a bare real) into a complex number.
pub fn parse_complex<T: Scalar>(text: &str) -> Result<Complex<T>> {
    let parts: Vec<&str> = text.split(',').collect();
    match parts.as_slice() {
        [re] => Ok(Complex::new(T::parse(re)?, T::zero())),
        [re, im] => Ok(Complex::new(T::parse(re)?, T::parse(im)?)),
        _ => Err(Error::Parse(format!("expected \"re,im\", got {text:?}"))),
    }
}

/// Serde adapter for scalar fields: numbers or `"p/q"` strings in, the
/// scalar's natural JSON form out.
pub mod serde_scalar {
    use super::*;

    pub fn serialize<T: Scalar, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.to_json().serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> std::result::Result<T, D::Error> {
        let value = serde_json::Value::deserialize(d)?;
        from_json(&value).map_err(serde::de::Error::custom)
    }

    pub fn from_json<T: Scalar>(value: &serde_json::Value) -> Result<T> {
        match value {
            serde_json::Value::Number(n) => {
                // Go through the literal text so "0.3" stays 3/10 in exact mode.
                T::parse(&n.to_string())
            }
            serde_json::Value::String(s) => T::parse(s),
            other => Err(Error::Parse(format!("expected number or \"p/q\", got {other}"))),
        }
    }
}

/// Serde adapter for complex fields as `{"re": .., "im": ..}`.
pub mod serde_complex {
    use super::*;

    #[derive(Serialize, Deserialize)]
    #[serde(bound = "T: Scalar")]
    struct Repr<T: Scalar> {
        #[serde(with = "serde_scalar")]
        re: T,
        #[serde(with = "serde_scalar")]
        im: T,
    }

    pub fn serialize<T: Scalar, S: Serializer>(v: &Complex<T>, s: S) -> std::result::Result<S::Ok, S::Error> {
        Repr { re: v.re.clone(), im: v.im.clone() }.serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> std::result::Result<Complex<T>, D::Error> {
        let r = Repr::<T>::deserialize(d)?;
        Ok(Complex::new(r.re, r.im))
    }
}
