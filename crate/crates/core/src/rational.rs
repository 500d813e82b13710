//! Exact rational scalars and their decimal text forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational number used for every coordinate, time stamp and bound.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{text}` as an exact rational")]
pub struct ParseRationalError {
    pub text: String,
}

/// Integer as a rational.
pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `num / den` as a rational. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parse `"12"`, `"-0.125"`, `"1.5e-3"` or `"3/2"` into an exact rational.
///
/// Decimal fractions are read digit by digit, so `"0.1"` is exactly 1/10.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        text: text.to_string(),
    };
    let s = text.trim();
    if s.is_empty() {
        return Err(err());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = s[pos + 1..].parse().map_err(|_| err())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(err());
    }
    let joined = format!("{int_part}{frac_part}");
    let numer: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined.parse().map_err(|_| err())?
    };
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut value = Rational::from_integer(numer);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

/// Exact `p/q` text (or plain `p` for integers).
pub fn format_exact(v: &Rational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Decimal text rounded to `sig` significant digits, half away from zero,
/// without exponent notation and without trailing zeros.
pub fn format_decimal(v: &Rational, sig: usize) -> String {
    assert!(sig > 0);
    if v.is_zero() {
        return "0".to_string();
    }
    let negative = v.is_negative();
    let a = v.abs();
    let ten = BigInt::from(10);
    // exponent e with 10^e <= a < 10^(e+1)
    let mut e: i64 = (a.numer().bits() as i64 - a.denom().bits() as i64) * 30103 / 100000;
    loop {
        let p = pow10(e);
        if a < p {
            e -= 1;
        } else if a >= pow10(e + 1) {
            e += 1;
        } else {
            break;
        }
    }
    let shift = sig as i64 - 1 - e;
    let scaled = &a * pow10(shift);
    let (q, r) = scaled.numer().div_rem(scaled.denom());
    let mut digits = q;
    if Rational::new(r * BigInt::from(2), scaled.denom().clone()) >= Rational::one() {
        digits += 1;
    }
    let mut shift = shift;
    if digits >= num_traits::pow(ten.clone(), sig) {
        digits /= &ten;
        shift -= 1;
    }
    let mut text = digits.to_string();
    let out = if shift <= 0 {
        text.extend(std::iter::repeat_n('0', (-shift) as usize));
        text
    } else {
        let shift = shift as usize;
        if text.len() <= shift {
            let pad = "0".repeat(shift - text.len());
            text = format!("0.{pad}{text}");
        } else {
            text.insert(text.len() - shift, '.');
        }
        let trimmed = text.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    };
    if negative {
        format!("-{out}")
    } else {
        out
    }
}

fn pow10(e: i64) -> Rational {
    let p = num_traits::pow(BigInt::from(10), e.unsigned_abs() as usize);
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Nearest `f64`, for rendering and reporting only.
pub fn to_f64(v: &Rational) -> f64 {
    num_traits::ToPrimitive::to_f64(v).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_tenth_is_exact() {
        assert_eq!(parse_rational("0.1").unwrap(), ratio(1, 10));
        assert_eq!(parse_rational("-2.50").unwrap(), ratio(-5, 2));
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("1.5e2").unwrap(), int(150));
        assert_eq!(parse_rational("25e-3").unwrap(), ratio(1, 40));
        assert_eq!(parse_rational(".5").unwrap(), ratio(1, 2));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "abc", "1/0", "1.2.3", "--1", "."] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_decimal(&ratio(1, 3), 12), "0.333333333333");
        assert_eq!(format_decimal(&ratio(2, 3), 12), "0.666666666667");
        assert_eq!(format_decimal(&int(100), 12), "100");
        assert_eq!(format_decimal(&ratio(-1, 1024), 12), "-0.0009765625");
        assert_eq!(
            format_decimal(&ratio(9_999_999_999_999, 10), 12),
            "1000000000000"
        );
        assert_eq!(format_decimal(&ratio(1, 20), 12), "0.05");
    }

    #[test]
    fn exact_form() {
        assert_eq!(format_exact(&ratio(6, 4)), "3/2");
        assert_eq!(format_exact(&int(-7)), "-7");
    }
}
