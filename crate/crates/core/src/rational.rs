//! Exact rational arithmetic used for every duration, work volume and byte
//! count in the model. Conversion to `f64` happens only at report time.

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: u64, den: u64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Exact conversion of a finite float.
pub fn from_f64(v: f64) -> Option<Rational> {
    Rational::from_f64(v)
}

pub fn to_f64(v: &Rational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

pub fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Smallest integer `k` with `k * k >= q`, i.e. `ceil(sqrt(q))` for `q >= 0`.
pub fn ceil_sqrt(q: &Rational) -> BigInt {
    if !q.is_positive() {
        return BigInt::zero();
    }
    // k^2 is an integer, so k^2 >= q iff k^2 >= ceil(q).
    let target = q.ceil().to_integer();
    let root = target.sqrt();
    if &root * &root >= target {
        root
    } else {
        root + BigInt::one()
    }
}

/// Round half up to the nearest integer.
pub fn round_half_up(q: &Rational) -> BigInt {
    (q + Rational::new(BigInt::one(), BigInt::from(2)))
        .floor()
        .to_integer()
}

/// Parses `"3"`, `"-1.5"`, `"2.5e9"` or `"7/3"` exactly.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::invalid("number", format!("cannot parse {s:?} as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    parse_decimal(s).ok_or_else(bad)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (Sign::Minus, rest),
        None => (Sign::Plus, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole
        .chars()
        .chain(frac.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits: BigInt = format!("{whole}{frac}0").parse::<BigInt>().ok()? / BigInt::from(10);
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    Some(if sign == Sign::Minus { -value } else { value })
}

/// Serde adapter: writes a rational as a JSON number (lossy), reads a JSON
/// number or an exact string such as `"1/3"`.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_f64(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        NumberOrString::deserialize(d)?
            .into_rational()
            .map_err(serde::de::Error::custom)
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    pub(crate) enum NumberOrString {
        Number(serde_json::Number),
        String(String),
    }

    impl NumberOrString {
        pub(crate) fn into_rational(self) -> Result<Rational> {
            match self {
                // Decimal text is parsed exactly rather than through f64.
                NumberOrString::Number(n) => parse(&n.to_string()),
                NumberOrString::String(s) => parse(&s),
            }
        }
    }
}

pub mod serde_rational_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(to_f64).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        Vec::<serde_rational::NumberOrString>::deserialize(d)?
            .into_iter()
            .map(|x| x.into_rational().map_err(serde::de::Error::custom))
            .collect()
    }
}

pub mod serde_rational_opt {
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &Option<Rational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref().map(to_f64).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Rational>, D::Error> {
        Option::<serde_rational::NumberOrString>::deserialize(d)?
            .map(|x| x.into_rational().map_err(serde::de::Error::custom))
            .transpose()
    }
}

pub mod serde_rational_vec_opt {
    use super::*;

    pub fn serialize<S: Serializer>(
        v: &Option<Vec<Rational>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|v| v.iter().map(to_f64).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Vec<Rational>>, D::Error> {
        Option::<Vec<serde_rational::NumberOrString>>::deserialize(d)?
            .map(|v| {
                v.into_iter()
                    .map(|x| x.into_rational().map_err(serde::de::Error::custom))
                    .collect()
            })
            .transpose()
    }
}
