//! Scalar arithmetic for the two coding modes: exact rationals and `f64`.
//!
//! Exact rational arithmetic is the reference path: encoding, decoding and
//! error correction are algebraically exact, so round-trip tests can assert
//! bit-identical recovery. `f64` is the fast path for large node counts and
//! for the approximate decoder; it supports no adversary correction.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{Num, NumRef};
use num::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar. Always in lowest terms with positive denominator.
pub type Rat = BigRational;

/// Arithmetic mode of a scheme instance. Uniform within one instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    Rational,
    Float64,
}

/// Field-like scalar usable by the generic coding algorithms.
///
/// Implemented by [`Rat`] (exact) and `f64` (approximate). Algorithms that
/// are only meaningful in exact arithmetic (error-locator decoding) are
/// written against [`Rat`] directly.
pub trait Scalar:
    Clone + PartialEq + Debug + Display + Num + NumRef + std::ops::Neg<Output = Self>
{
    fn from_int(v: i64) -> Self;

    /// Lossless embedding of an `f64` (rationals take the exact binary value).
    fn from_f64(v: f64) -> Self;

    /// Approximate magnitude, used only for reporting and float-mode checks.
    fn to_f64_lossy(&self) -> f64;

    /// Parses wire text: rationals accept `p/q` and decimal strings exactly,
    /// floats accept anything `f64::from_str` does.
    fn parse_text(text: &str) -> Option<Self>;
}

impl Scalar for Rat {
    fn from_int(v: i64) -> Self {
        Rat::from_integer(BigInt::from(v))
    }

    fn from_f64(v: f64) -> Self {
        Rat::from_float(v).expect("finite float")
    }

    fn to_f64_lossy(&self) -> f64 {
        rat_to_f64(self)
    }

    fn parse_text(text: &str) -> Option<Self> {
        parse_rat(text).ok()
    }
}

impl Scalar for f64 {
    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64_lossy(&self) -> f64 {
        *self
    }

    fn parse_text(text: &str) -> Option<Self> {
        text.trim().parse().ok()
    }
}

/// Error parsing a rational from its text form.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseRatError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// Parses `"p"`, `"p/q"` or a plain decimal string (`"-1.25"`) into an exact
/// rational. Decimal input is quantized exactly: `1.25` becomes `5/4`.
pub fn parse_rat(text: &str) -> Result<Rat, ParseRatError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseRatError::Empty);
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| ParseRatError::Invalid(s.into()))?;
        let d = BigInt::from_str(den.trim()).map_err(|_| ParseRatError::Invalid(s.into()))?;
        if d.is_zero() {
            return Err(ParseRatError::ZeroDenominator(s.into()));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let digits = frac_part.trim();
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseRatError::Invalid(s.into()));
        }
        let neg = int_part.trim_start().starts_with('-');
        let whole =
            BigInt::from_str(int_part.trim()).map_err(|_| ParseRatError::Invalid(s.into()))?;
        let frac = BigInt::from_str(digits).map_err(|_| ParseRatError::Invalid(s.into()))?;
        let scale = BigInt::from(10u32).pow(digits.len() as u32);
        let frac_signed = if neg { -frac } else { frac };
        return Ok(Rat::new(whole * &scale + frac_signed, scale));
    }
    let n = BigInt::from_str(s).map_err(|_| ParseRatError::Invalid(s.into()))?;
    Ok(Rat::from_integer(n))
}

/// Formats a rational as `"p/q"` (or `"p"` when the denominator is one).
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Best-effort conversion to `f64`, for reports and CSV output.
pub fn rat_to_f64(r: &Rat) -> f64 {
    // Avoids overflow on huge numerators by scaling both parts together.
    let n_bits = r.numer().bits() as i64;
    let d_bits = r.denom().bits() as i64;
    let shift = (n_bits.max(d_bits) - 900).max(0) as u64;
    let n = r.numer() >> shift;
    let d = r.denom() >> shift;
    let nf = bigint_to_f64(&n);
    let df = bigint_to_f64(&d);
    if df == 0.0 {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        nf / df
    }
}

fn bigint_to_f64(b: &BigInt) -> f64 {
    // BigInt -> f64 via string is slow; go through i128 when small.
    if let Ok(v) = i128::try_from(b.clone()) {
        v as f64
    } else {
        b.to_string().parse::<f64>().unwrap_or(f64::INFINITY)
    }
}

/// Serde adapters for the `"p/q"` string encoding of rationals.
pub mod serde_rat {
    use super::{format_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let text = String::deserialize(d)?;
        parse_rat(&text).map_err(serde::de::Error::custom)
    }

    /// Same encoding for `Vec<Rat>` fields.
    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&format_rat(r))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
            let texts = Vec::<String>::deserialize(d)?;
            texts
                .iter()
                .map(|t| parse_rat(t).map_err(serde::de::Error::custom))
                .collect()
        }
    }
}

/// Shorthand for an integer-valued rational.
pub fn rat(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Shorthand for the rational `n/d`.
pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}
