//! Exact rational helpers: decimal parsing, fixed-point formatting and
//! support thresholds that resolve to integer counts.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};

pub type Rational = Ratio<u64>;

/// Parses `0.75`, `75%`, `3` or `3/4` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::InvalidParameter(format!("not a non-negative number: {text:?}"));
    if let Some(pct) = text.strip_suffix('%') {
        let value = parse_rational(pct).map_err(|_| bad())?;
        return Ok(value / 100);
    }
    if let Some((num, den)) = text.split_once('/') {
        let num: u64 = num.trim().parse().map_err(|_| bad())?;
        let den: u64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(num, den));
    }
    let (whole, frac) = match text.split_once('.') {
        Some((w, f)) => (w, f),
        None => (text, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let digits_ok = |s: &str| s.bytes().all(|b| b.is_ascii_digit());
    if !digits_ok(whole) || !digits_ok(frac) || frac.len() > 18 {
        return Err(bad());
    }
    let whole: u64 = if whole.is_empty() {
        0
    } else {
        whole.parse().map_err(|_| bad())?
    };
    let den = 10u64.pow(frac.len() as u32);
    let frac: u64 = if frac.is_empty() {
        0
    } else {
        frac.parse().map_err(|_| bad())?
    };
    let num = whole
        .checked_mul(den)
        .and_then(|w| w.checked_add(frac))
        .ok_or_else(bad)?;
    Ok(Ratio::new(num, den))
}

/// Renders `value` with exactly `places` decimals, rounding half to even.
pub fn format_fixed(value: Rational, places: u32) -> String {
    let scale = 10u128.pow(places);
    let num = *value.numer() as u128 * scale;
    let den = *value.denom() as u128;
    let mut q = num / den;
    let rem = num % den;
    if 2 * rem > den || (2 * rem == den && q % 2 == 1) {
        q += 1;
    }
    if places == 0 {
        return q.to_string();
    }
    format!(
        "{}.{:0width$}",
        q / scale,
        q % scale,
        width = places as usize
    )
}

/// Six-decimal rendering used by every report.
pub fn format_decimal(value: Rational) -> String {
    format_fixed(value, 6)
}

pub fn to_f64(value: Rational) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}

/// `ceil(fraction * n)` computed without rounding error.
pub fn ceil_count(fraction: Rational, n: u64) -> u64 {
    let num = *fraction.numer() as u128 * n as u128;
    let den = *fraction.denom() as u128;
    num.div_ceil(den) as u64
}

/// A minimum support given either as an absolute count or as a fraction of
/// the corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threshold {
    Count(u64),
    Fraction(Rational),
}

impl Threshold {
    pub fn resolve(self, corpus_size: usize) -> u64 {
        match self {
            Threshold::Count(c) => c,
            Threshold::Fraction(f) => ceil_count(f, corpus_size as u64),
        }
    }
}

impl FromStr for Threshold {
    type Err = Error;

    /// Integers are counts; a decimal point, `%` or `/` makes a fraction.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) {
            let count = s
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad count {s:?}")))?;
            return Ok(Threshold::Count(count));
        }
        parse_rational(s).map(Threshold::Fraction)
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Count(c) => write!(f, "{c}"),
            Threshold::Fraction(r) => write!(f, "{}", format_decimal(*r)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_and_percentages() {
        assert_eq!(parse_rational("0.75").unwrap(), Ratio::new(3, 4));
        assert_eq!(parse_rational("75%").unwrap(), Ratio::new(3, 4));
        assert_eq!(parse_rational("2/3").unwrap(), Ratio::new(2, 3));
        assert_eq!(parse_rational("1").unwrap(), Ratio::from_integer(1));
        assert_eq!(parse_rational(".5").unwrap(), Ratio::new(1, 2));
        assert!(parse_rational("-0.1").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(format_decimal(Ratio::new(3, 4)), "0.750000");
        assert_eq!(format_decimal(Ratio::new(2, 3)), "0.666667");
        assert_eq!(format_decimal(Ratio::new(15, 16)), "0.937500");
        // 0.0000005 ties down to even, 0.0000015 ties up to even
        assert_eq!(format_decimal(Ratio::new(5, 10_000_000)), "0.000000");
        assert_eq!(format_decimal(Ratio::new(15, 10_000_000)), "0.000002");
        assert_eq!(format_fixed(Ratio::new(5, 2), 0), "2");
        assert_eq!(format_fixed(Ratio::new(7, 2), 0), "4");
        assert_eq!(format_decimal(Ratio::from_integer(12)), "12.000000");
    }

    #[test]
    fn thresholds_resolve_with_ceiling() {
        assert_eq!("3".parse::<Threshold>().unwrap(), Threshold::Count(3));
        let two_pct: Threshold = "0.02".parse().unwrap();
        assert_eq!(two_pct.resolve(100), 2);
        assert_eq!(two_pct.resolve(101), 3);
        assert_eq!("10%".parse::<Threshold>().unwrap().resolve(5), 1);
        assert_eq!(ceil_count(Ratio::new(1, 3), 9), 3);
        assert_eq!(ceil_count(Ratio::from_integer(0), 9), 0);
    }
}
