//! Exact rational helpers shared by every module.

use alloc::format;
use alloc::string::{String, ToString};
use core::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational number used for every weight and coefficient.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FractionError {
    #[error("empty fraction string")]
    Empty,
    #[error("`{0}` is not an exact fraction (decimals are not accepted)")]
    Decimal(String),
    #[error("`{0}` is not a fraction of the form num/den")]
    Malformed(String),
    #[error("`{0}` has a zero denominator")]
    ZeroDenominator(String),
}

/// Parses `"num/den"` or a bare integer. Decimal notation is rejected.
pub fn parse_fraction(text: &str) -> Result<Rational, FractionError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(FractionError::Empty);
    }
    if text.contains(['.', 'e', 'E']) {
        return Err(FractionError::Decimal(text.into()));
    }
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| FractionError::Malformed(text.into()))?;
    let den = BigInt::from_str(den).map_err(|_| FractionError::Malformed(text.into()))?;
    if den.is_zero() {
        return Err(FractionError::ZeroDenominator(text.into()));
    }
    Ok(Rational::new(num, den))
}

/// Canonical `"num/den"` rendering; the denominator is always printed.
pub fn format_fraction(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `2^-exp` as an exact rational.
pub fn dyadic(num: i64, exp: u32) -> Rational {
    Rational::new(BigInt::from(num), BigInt::one() << exp as usize)
}

pub fn pow2(exp: usize) -> BigInt {
    BigInt::one() << exp
}

/// Least common multiple of the denominators of `values` (1 for an empty list).
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Smallest `m` with `2^m >= value` (0 for `value <= 1`).
pub fn ceil_log2(value: &BigInt) -> usize {
    if value <= &BigInt::one() {
        return 0;
    }
    let bits = value.bits() as usize;
    if (value - BigInt::one()).bits() as usize == bits {
        bits
    } else {
        // exact power of two
        bits - 1
    }
}

/// Decimal rendering with `digits` significant digits, rounded half away
/// from zero. Display only: fractions are the authoritative values.
pub fn to_decimal(value: &Rational, digits: usize) -> String {
    if value.is_zero() {
        return "0".into();
    }
    let digits = digits.max(1);
    let negative = value.is_negative();
    let magnitude = value.abs();
    let ten = BigInt::from(10);

    // exponent e with 10^e <= |v| < 10^(e+1)
    let mut exponent: i64 = magnitude.numer().to_string().len() as i64
        - magnitude.denom().to_string().len() as i64;
    loop {
        let lower = pow10_rational(exponent);
        if magnitude < lower {
            exponent -= 1;
            continue;
        }
        if magnitude >= pow10_rational(exponent + 1) {
            exponent += 1;
            continue;
        }
        break;
    }

    let shift = digits as i64 - 1 - exponent;
    let scaled = &magnitude * pow10_rational(shift);
    let (quotient, remainder) = scaled.numer().div_rem(scaled.denom());
    let mut mantissa = quotient;
    if remainder * BigInt::from(2) >= *scaled.denom() {
        mantissa += BigInt::one();
    }
    let mut shift = shift;
    if mantissa == ten.pow(digits as u32) {
        mantissa /= &ten;
        shift -= 1;
    }
    let digits_str = mantissa.to_string();
    let mut out = place_point(&digits_str, shift);
    if negative {
        out.insert(0, '-');
    }
    out
}

fn pow10_rational(exp: i64) -> Rational {
    let ten = BigInt::from(10);
    if exp >= 0 {
        Rational::from_integer(ten.pow(exp as u32))
    } else {
        Rational::new(BigInt::one(), ten.pow((-exp) as u32))
    }
}

// value = digits * 10^-shift
fn place_point(digits: &str, shift: i64) -> String {
    let mut out = if shift <= 0 {
        let mut s = String::from(digits);
        for _ in 0..(-shift) {
            s.push('0');
        }
        return s;
    } else if (shift as usize) >= digits.len() {
        let mut s = String::from("0.");
        for _ in 0..(shift as usize - digits.len()) {
            s.push('0');
        }
        s.push_str(digits);
        s
    } else {
        let split = digits.len() - shift as usize;
        format!("{}.{}", &digits[..split], &digits[split..])
    };
    while out.ends_with('0') {
        out.pop();
    }
    if out.ends_with('.') {
        out.pop();
    }
    out
}
