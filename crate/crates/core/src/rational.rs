//! Exact rational helpers: decimal parsing and printing.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational used for weights, scalarizations and objective values.
pub type Rational = Ratio<i128>;

/// Decimal inputs are limited to this many fractional digits so that
/// products with 64-bit costs stay far from the `i128` range.
pub const MAX_FRACTION_DIGITS: usize = 15;

/// Parses `"0.25"`, `"-3"`, `"1e-2"` or `"1/3"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::input("empty number"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: i128 = num
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("bad numerator in '{s}'")))?;
        let den: i128 = den
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("bad denominator in '{s}'")))?;
        if den == 0 {
            return Err(Error::input(format!("zero denominator in '{s}'")));
        }
        return Ok(Rational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..]
                .parse()
                .map_err(|_| Error::input(format!("bad exponent in '{s}'")))?;
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
        return Err(Error::input(format!("not a number: '{s}'")));
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(Error::input(format!("not a number: '{s}'")));
    }
    let frac_part = frac_part.trim_end_matches('0');
    let scale = frac_part.len() as i32 - exponent;
    if scale > MAX_FRACTION_DIGITS as i32 || scale < -(MAX_FRACTION_DIGITS as i32) {
        return Err(Error::input(format!("too many digits in '{s}'")));
    }
    let all_digits = format!("{int_part}{frac_part}");
    let all_digits = all_digits.trim_start_matches('0');
    let mut numer: i128 = if all_digits.is_empty() {
        0
    } else {
        all_digits
            .parse()
            .map_err(|_| Error::input(format!("number out of range: '{s}'")))?
    };
    if negative {
        numer = -numer;
    }
    let pow = 10i128.pow(scale.unsigned_abs());
    Ok(if scale >= 0 {
        Rational::new(numer, pow)
    } else {
        Rational::from_integer(
            numer
                .checked_mul(pow)
                .ok_or_else(|| Error::input(format!("number out of range: '{s}'")))?,
        )
    })
}

/// Renders `r` as a terminating decimal when one exists, else as `a/b`.
pub fn format_rational(r: &Rational) -> String {
    match decimal_digits(r) {
        Some(digits) => format_fixed(r, digits),
        None => format!("{}/{}", r.numer(), r.denom()),
    }
}

/// Number of fractional digits needed to print `r` exactly, if finite.
pub fn decimal_digits(r: &Rational) -> Option<u32> {
    let mut den = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while den.is_even() {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    (den == 1).then_some(twos.max(fives))
}

fn format_fixed(r: &Rational, digits: u32) -> String {
    let scaled = r * Rational::from_integer(10i128.pow(digits));
    debug_assert!(scaled.is_integer());
    let n = scaled.to_integer();
    if digits == 0 {
        return n.to_string();
    }
    let sign = if n.is_negative() { "-" } else { "" };
    let abs = n.unsigned_abs().to_string();
    let width = digits as usize + 1;
    let padded = format!("{abs:0>width$}");
    let (int, frac) = padded.split_at(padded.len() - digits as usize);
    format!("{sign}{int}.{frac}")
}

pub fn to_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Largest multiple of `1/grid` not exceeding `r`.
pub fn floor_to_grid(r: &Rational, grid: i128) -> Rational {
    debug_assert!(grid > 0);
    let scaled = r * Rational::from_integer(grid);
    Rational::new(scaled.floor().to_integer(), grid)
}

pub(crate) fn lcm_of_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> i128 {
    values
        .into_iter()
        .fold(1i128, |acc, r| if r.is_zero() { acc } else { acc.lcm(r.denom()) })
}
