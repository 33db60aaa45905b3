//! Exact cost values.
//!
//! Costs are `Ratio<i64>`. JSON accepts plain numbers (read from their
//! literal text, so `0.1` is exactly 1/10) or `"p/q"` strings.

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

pub type Cost = Rational64;

pub(crate) fn serialize_cost<S: serde::Serializer>(c: &Cost, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_cost(c))
}

/// Parses a decimal literal such as `12`, `0.25`, `-3`, `1.5e-3` exactly.
pub fn parse_decimal(text: &str) -> Option<Cost> {
    let text = text.trim();
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let mut numer: i128 = 0;
    for c in int_part.chars().chain(frac_part.chars()) {
        numer = numer.checked_mul(10)?.checked_add(c.to_digit(10)? as i128)?;
    }
    let scale = exponent - frac_part.len() as i32;
    let mut denom: i128 = 1;
    if scale >= 0 {
        for _ in 0..scale {
            numer = numer.checked_mul(10)?;
        }
    } else {
        for _ in 0..(-scale) {
            denom = denom.checked_mul(10)?;
        }
    }
    let g = gcd_i128(numer, denom);
    let (numer, denom) = (numer / g, denom / g);
    let numer = i64::try_from(numer).ok()?;
    let denom = i64::try_from(denom).ok()?;
    let value = Cost::new(numer, denom);
    Some(if negative { -value } else { value })
}

/// Parses `"p/q"`, or any decimal literal accepted by [`parse_decimal`].
pub fn parse_cost_str(text: &str) -> Option<Cost> {
    match text.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            if q == 0 {
                return None;
            }
            Some(Cost::new(p, q))
        }
        None => parse_decimal(text),
    }
}

/// Canonical textual form: `"7"` for integers, `"p/q"` otherwise.
pub fn format_cost(value: &Cost) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn to_f64(value: &Cost) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Best rational approximation of `value` with denominator at most `max_denom`
/// (continued-fraction convergents).
pub fn approx_rational(value: f64, max_denom: i64) -> Cost {
    if !value.is_finite() {
        return Cost::zero();
    }
    let negative = value < 0.0;
    let mut rest = value.abs();
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    for _ in 0..64 {
        let a = rest.floor();
        if a > i64::MAX as f64 / 2.0 {
            break;
        }
        let a = a as i64;
        let Some(p2) = a.checked_mul(p1).and_then(|v| v.checked_add(p0)) else {
            break;
        };
        let Some(q2) = a.checked_mul(q1).and_then(|v| v.checked_add(q0)) else {
            break;
        };
        if q2 > max_denom {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = rest - a as f64;
        if frac < 1e-15 || (p1 as f64 / q1 as f64 - value.abs()).abs() < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
    }
    if q1 == 0 {
        return Cost::zero();
    }
    let approx = Cost::new(p1, q1);
    if negative {
        -approx
    } else {
        approx
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    if a == 0 {
        1
    } else {
        a
    }
}
