//! Exact time arithmetic.
//!
//! All release times, deadlines, lengths and bound coefficients are kept as
//! arbitrary-precision rationals so that inequalities like
//! `|Opt| <= theta * |Alg| + 2k` can be checked without float drift.
//! On the wire, times are decimal strings (`"12.5"`) parsed exactly; values
//! whose reduced denominator is not of the form `2^a * 5^b` render as `"p/q"`.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

use crate::error::Error;

pub type Rational = num_rational::BigRational;

/// Shorthand for a rational from an integer pair.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Shorthand for an integral rational.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// Parses `"12"`, `"-3.25"`, `"0.001"` or `"p/q"` into an exact rational.
pub fn parse_exact(text: &str) -> Result<Rational, Error> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::BadNumber {
            text: text.to_string(),
        });
    }
    if let Some((num, den)) = text.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| Error::BadNumber {
            text: text.to_string(),
        })?;
        let den = BigInt::from_str(den.trim()).map_err(|_| Error::BadNumber {
            text: text.to_string(),
        })?;
        if den.is_zero() {
            return Err(Error::BadNumber {
                text: text.to_string(),
            });
        }
        return Ok(Rational::new(num, den));
    }
    let (sign, digits) = match text.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, text.strip_prefix('+').unwrap_or(text)),
    };
    let (whole, frac) = match digits.split_once('.') {
        Some((w, f)) => (w, f),
        None => (digits, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err(Error::BadNumber {
            text: text.to_string(),
        });
    }
    let all_digits = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(whole) || !all_digits(frac) {
        return Err(Error::BadNumber {
            text: text.to_string(),
        });
    }
    let mut num = if whole.is_empty() {
        BigInt::zero()
    } else {
        BigInt::from_str(whole).expect("digits checked")
    };
    let mut den = BigInt::one();
    for b in frac.bytes() {
        num = num * 10 + (b - b'0');
        den *= 10;
    }
    Ok(Rational::new(num * sign, den))
}

/// Renders a rational exactly: an integer, a terminating decimal, or `"p/q"`.
pub fn format_exact(value: &Rational) -> String {
    let num = value.numer();
    let den = value.denom();
    if den.is_one() {
        return num.to_string();
    }
    // A reduced denominator of the form 2^a * 5^b has a terminating decimal.
    let mut twos = 0u32;
    let mut fives = 0u32;
    let mut rest = den.clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&rest % &two).is_zero() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return format!("{num}/{den}");
    }
    let places = twos.max(fives);
    let scale = BigInt::from(10).pow(places);
    let scaled = (num * &scale / den).abs();
    let digits = scaled.to_string();
    let digits = if digits.len() <= places as usize {
        format!(
            "{}{}",
            "0".repeat(places as usize + 1 - digits.len()),
            digits
        )
    } else {
        digits
    };
    let (whole, frac) = digits.split_at(digits.len() - places as usize);
    let sign = if value.is_negative() { "-" } else { "" };
    format!("{sign}{whole}.{frac}")
}

/// Lossy float view, for statistics and CSV output only.
pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Serde adapter storing rationals as exact strings.
pub mod serde_exact {
    use super::{format_exact, parse_exact, Rational};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&format_exact(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(de)?;
        parse_exact(&text).map_err(de::Error::custom)
    }
}

/// Serde adapter for `Option<Rational>`.
pub mod serde_exact_opt {
    use super::{format_exact, parse_exact, Rational};
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Option<Rational>, ser: S) -> Result<S::Ok, S::Error> {
        match value {
            Some(v) => ser.serialize_some(&format_exact(v)),
            None => ser.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Rational>, D::Error> {
        let text: Option<String> = Option::deserialize(de)?;
        text.map(|t| parse_exact(&t).map_err(de::Error::custom))
            .transpose()
    }
}
