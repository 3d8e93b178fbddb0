//! Arbitrary-precision rational scalars.
//!
//! Every quantity in this crate (breakpoints, slopes, weights, dataset
//! coordinates, error fractions) is a [`Rational`]. The representation is
//! always in lowest terms with a positive denominator, so equality is value
//! equality and serialized forms are canonical. Floating point appears only
//! in decimal *rendering* for plot output, never in any computation.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::str::FromStr;
use thiserror::Error;

/// The only numeric type used by the function algebra.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer in rational literal {0:?}")]
    BadInteger(String),
    #[error("zero denominator in rational literal {0:?}")]
    ZeroDenominator(String),
}

/// Parses `"p/q"` or `"p"` into a normalized rational.
///
/// Zero denominators are rejected here, at construction time; nothing
/// downstream ever checks for them again.
pub fn parse_rational(text: &str) -> Result<Rational, RationalParseError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(RationalParseError::Empty);
    }
    let (numer_text, denom_text) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (trimmed, None),
    };
    let numer = BigInt::from_str(numer_text)
        .map_err(|_| RationalParseError::BadInteger(trimmed.to_owned()))?;
    let denom = match denom_text {
        Some(d) => {
            BigInt::from_str(d).map_err(|_| RationalParseError::BadInteger(trimmed.to_owned()))?
        }
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return Err(RationalParseError::ZeroDenominator(trimmed.to_owned()));
    }
    Ok(Rational::new(numer, denom))
}

/// `n / d` from machine integers. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `numer / 2^exp`.
pub fn dyadic(numer: i64, exp: u32) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::one() << exp)
}

/// `2^exp` as a rational, for arbitrary (possibly negative) exponents.
pub fn pow2(exp: i64) -> Rational {
    let power = BigInt::one() << exp.unsigned_abs();
    if exp >= 0 {
        Rational::from_integer(power)
    } else {
        Rational::new(BigInt::one(), power)
    }
}

/// The classification threshold 1/2.
pub fn one_half() -> Rational {
    rat(1, 2)
}

/// Exact comparison with a word-sized cross-multiplication fast path.
///
/// `num-rational`'s `Ord` walks a continued fraction with an allocating
/// division per step, which dominates evaluation on large functions. When
/// both operands fit in `i64` (the common case for breakpoints and probe
/// points) the cross products fit in `i128` exactly, so a plain integer
/// comparison suffices. Denominators are positive by representation
/// invariant, so cross-multiplying preserves order.
pub(crate) fn cmp_rationals(a: &Rational, b: &Rational) -> Ordering {
    let fits = |r: &Rational| Some((r.numer().to_i64()?, r.denom().to_i64()?));
    match (fits(a), fits(b)) {
        (Some((an, ad)), Some((bn, bd))) => {
            (i128::from(an) * i128::from(bd)).cmp(&(i128::from(bn) * i128::from(ad)))
        }
        _ => a.cmp(b),
    }
}

/// Serde adapter rendering rationals as lowest-terms strings, the wire form
/// used everywhere in this crate. Apply with `#[serde(with = "...")]`.
pub mod rational_string {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&value.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// Renders a rational as a decimal string with `sig_digits` significant
/// digits (round half away from zero), computed by exact long division.
///
/// This is presentation only; no verification path consumes its output.
pub fn to_decimal(value: &Rational, sig_digits: usize) -> String {
    let sig = sig_digits.max(1);
    if value.is_zero() {
        return "0".to_owned();
    }
    let negative = value.is_negative();
    let numer = value.numer().abs();
    let denom = value.denom().clone();

    // Decimal exponent e: the number of digits before the point, i.e.
    // 10^(e-1) <= |value| < 10^e.
    let ten = BigInt::from(10);
    let exponent: i64 = if numer >= denom {
        (&numer / &denom).to_str_radix(10).len() as i64
    } else {
        let mut scaled = numer.clone();
        let mut shifts: i64 = 0;
        loop {
            scaled *= &ten;
            shifts += 1;
            if scaled >= denom {
                break;
            }
        }
        1 - shifts
    };

    // digits = round(|value| * 10^(sig - e)), an integer with `sig` digits.
    let shift = sig as i64 - exponent;
    let (scaled_numer, scaled_denom) = if shift >= 0 {
        (numer * ten.pow(shift as u32), denom)
    } else {
        (numer, denom * ten.pow((-shift) as u32))
    };
    let mut digits = (BigInt::from(2) * scaled_numer + &scaled_denom) / (BigInt::from(2) * scaled_denom);
    let mut exponent = exponent;
    let mut digit_text = digits.to_str_radix(10);
    if digit_text.len() > sig {
        // Rounding carried into a new leading digit (e.g. 0.99 -> 1.0).
        digits /= &ten;
        exponent += 1;
        digit_text = digits.to_str_radix(10);
    }

    let mut body = if exponent >= digit_text.len() as i64 {
        let zeros = exponent as usize - digit_text.len();
        format!("{digit_text}{}", "0".repeat(zeros))
    } else if exponent > 0 {
        let (head, tail) = digit_text.split_at(exponent as usize);
        format!("{head}.{tail}")
    } else {
        format!("0.{}{digit_text}", "0".repeat((-exponent) as usize))
    };
    if body.contains('.') {
        while body.ends_with('0') {
            body.pop();
        }
        if body.ends_with('.') {
            body.pop();
        }
    }
    if negative {
        format!("-{body}")
    } else {
        body
    }
}
