//! Number plumbing: exact rationals, binary high-precision floats, and
//! compensated summation for the `f64` paths.

use std::str::FromStr;

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::ops::{BitTest, UnsignedAbs};
use dashu_int::{IBig, UBig};
use dashu_ratio::RBig;

use crate::error::{Error, Result};

/// Binary floating point with an explicit working precision in bits.
pub type Float = FBig<HalfEven, 2>;

/// Default working precision for `Z*` and the entropy factors.
pub const DEFAULT_PRECISION: usize = 200;

/// Parses `"3"`, `"-1/4"`, `"0.05"` or `"1.5e-3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<RBig> {
    let s = text.trim();
    let err = || Error::Parse(text.to_string());
    if s.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num = IBig::from_str(num.trim()).map_err(|_| err())?;
        let den = IBig::from_str(den.trim()).map_err(|_| err())?;
        if den == IBig::ZERO {
            return Err(err());
        }
        return Ok(RBig::from_parts_signed(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i64 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], exp)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut num = UBig::from_str(if all_digits.is_empty() { "0" } else { &all_digits })
        .map_err(|_| err())?;
    let mut den = UBig::ONE;
    let scale = exponent - frac_part.len() as i64;
    if scale >= 0 {
        num *= UBig::from(10u8).pow(scale as usize);
    } else {
        den = UBig::from(10u8).pow((-scale) as usize);
    }
    let num = if negative { -IBig::from(num) } else { IBig::from(num) };
    Ok(RBig::from_parts(num, den))
}

pub fn rational_from_i64(v: i64) -> RBig {
    RBig::from(v)
}

pub fn rational_to_f64(x: &RBig) -> f64 {
    x.to_f64().value()
}

pub fn pow_rational(x: &RBig, k: u32) -> RBig {
    let mut out = RBig::ONE;
    for _ in 0..k {
        out = &out * x;
    }
    out
}

/// Converts an exact rational to a float carrying `precision` bits.
pub fn to_float(x: &RBig, precision: usize) -> Float {
    let num = Float::from(x.numerator().clone())
        .with_precision(precision)
        .value();
    let den = Float::from(IBig::from(x.denominator().clone()))
        .with_precision(precision)
        .value();
    num / den
}

pub fn float_from_f64(x: f64, precision: usize) -> Float {
    Float::try_from(x)
        .expect("finite f64")
        .with_precision(precision)
        .value()
}

pub fn float_to_f64(x: &Float) -> f64 {
    x.to_f64().value()
}

/// `ln |x|` of an exact rational, without overflowing `f64` on the way.
pub fn ln_abs_rational(x: &RBig) -> f64 {
    if *x == RBig::ZERO {
        return f64::NEG_INFINITY;
    }
    let num = IBig::from(x.numerator().clone().unsigned_abs());
    let den = IBig::from(x.denominator().clone());
    ln_ubig(&num) - ln_ubig(&den)
}

/// `ln |x|` of a high-precision float.
pub fn ln_abs_float(x: &Float) -> f64 {
    if *x == Float::ZERO {
        return f64::NEG_INFINITY;
    }
    let abs = if *x < Float::ZERO { -x.clone() } else { x.clone() };
    float_to_f64(&abs.ln())
}

fn ln_ubig(x: &IBig) -> f64 {
    let bits = x.clone().unsigned_abs().bit_len();
    if bits <= 1000 {
        return x.to_f64().value().ln();
    }
    let shift = bits - 64;
    let top: IBig = x >> shift;
    top.to_f64().value().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/4").unwrap(), RBig::from_parts(1.into(), 4u8.into()));
        assert_eq!(parse_rational("-3/6").unwrap(), RBig::from_parts((-1).into(), 2u8.into()));
        assert_eq!(parse_rational("0.05").unwrap(), RBig::from_parts(1.into(), 20u8.into()));
        assert_eq!(parse_rational("-1.5e-3").unwrap(), RBig::from_parts((-3).into(), 2000u16.into()));
        assert_eq!(parse_rational("2e2").unwrap(), RBig::from(200));
        assert_eq!(parse_rational(".5").unwrap(), RBig::from_parts(1.into(), 2u8.into()));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn ln_of_huge_rationals() {
        let big = pow_rational(&RBig::from(10), 400);
        assert!((ln_abs_rational(&big) - 400.0 * 10f64.ln()).abs() < 1e-9);
        let tiny = RBig::ONE / big;
        assert!((ln_abs_rational(&tiny) + 400.0 * 10f64.ln()).abs() < 1e-9);
        assert!((ln_abs_rational(&RBig::from(-7)) - 7f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn float_roundtrip() {
        let x = parse_rational("-3/7").unwrap();
        let f = to_float(&x, 200);
        assert!((float_to_f64(&f) + 3.0 / 7.0).abs() < 1e-16);
        assert!((ln_abs_float(&f) - (3.0f64 / 7.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1e16, 1.0, -1e16, 1.0].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }
}
