//! Exact rational helpers: construction, parsing of `"p/q"` and decimal
//! strings, and formatting.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn half() -> Rational {
    ratio(1, 2)
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite `f64`.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite number {x}")))
}

/// Parses `"p/q"`, an integer, or a plain decimal such as `"0.95"` or `"-1.5e-3"`.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("0{whole}{frac}").parse().map_err(|_| bad())?;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(all);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Checks `0 <= r <= 1`.
pub fn is_probability(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

/// Largest rational with denominator `2^bits` that does not exceed `r`.
pub fn round_down_dyadic(r: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits;
    let scaled = (r * Rational::from_integer(scale.clone())).floor();
    Rational::new(scaled.to_integer(), scale)
}

/// Smallest rational with denominator `2^bits` that is not below `r`.
pub fn round_up_dyadic(r: &Rational, bits: u32) -> Rational {
    let scale = BigInt::one() << bits;
    let scaled = (r * Rational::from_integer(scale.clone())).ceil();
    Rational::new(scaled.to_integer(), scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse("3/5").unwrap(), ratio(3, 5));
        assert_eq!(parse(" 19/20 ").unwrap(), ratio(19, 20));
        assert_eq!(parse("0.95").unwrap(), ratio(19, 20));
        assert_eq!(parse("1").unwrap(), int(1));
        assert_eq!(parse(".5").unwrap(), half());
        assert_eq!(parse("-1.5e-3").unwrap(), ratio(-3, 2000));
        assert_eq!(parse("2.5E2").unwrap(), int(250));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("").is_err());
        assert!(parse(".").is_err());
    }

    #[test]
    fn formats_integers_without_denominator() {
        assert_eq!(to_string(&int(1000)), "1000");
        assert_eq!(to_string(&ratio(575, 16)), "575/16");
        assert_eq!(to_string(&ratio(-2, 4)), "-1/2");
    }

    #[test]
    fn dyadic_rounding_brackets_value() {
        let third = ratio(1, 3);
        let lo = round_down_dyadic(&third, 20);
        let hi = round_up_dyadic(&third, 20);
        assert!(lo < third && third < hi);
        assert_eq!(&hi - &lo, Rational::new(BigInt::one(), BigInt::one() << 20));
        assert_eq!(round_down_dyadic(&half(), 3), half());
    }
}
