//! Small helpers on arbitrary-precision rationals.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

/// Nearest multiple of 2^-bits.
pub fn round_dyadic(q: &BigRational, bits: u32) -> BigRational {
    let scaled = q * BigRational::from_integer(pow2(bits));
    let r = (scaled + BigRational::new(BigInt::one(), BigInt::from(2))).floor();
    BigRational::new(r.to_integer(), pow2(bits))
}

/// Some rational `s` with `s >= sqrt(q)` and `s - sqrt(q) <= 2^-bits`.
pub fn sqrt_upper(q: &BigRational, bits: u32) -> BigRational {
    assert!(!q.is_negative(), "sqrt of negative rational");
    if q.is_zero() {
        return BigRational::zero();
    }
    let scale = pow2(2 * bits);
    let scaled = q * BigRational::from_integer(scale);
    let ceil = scaled.ceil().to_integer();
    let mut s = ceil.sqrt();
    if &s * &s < ceil {
        s += 1;
    }
    BigRational::new(s, pow2(bits))
}

/// Some rational `s` with `0 <= s <= sqrt(q)`.
pub fn sqrt_lower(q: &BigRational, bits: u32) -> BigRational {
    assert!(!q.is_negative(), "sqrt of negative rational");
    let scaled = q * BigRational::from_integer(pow2(2 * bits));
    let s = scaled.floor().to_integer().sqrt();
    BigRational::new(s, pow2(bits))
}

pub fn to_f64(q: &BigRational) -> f64 {
    if let Some(v) = q.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // very large numerator/denominator: scale down first
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = (nb - db).clamp(-1000, 1000);
    let adj = if shift >= 0 {
        q / BigRational::from_integer(pow2(shift as u32))
    } else {
        q * BigRational::from_integer(pow2((-shift) as u32))
    };
    adj.to_f64().unwrap_or(0.0) * 2f64.powi(shift as i32)
}

/// Largest f64 that is <= q.
pub fn to_f64_down(q: &BigRational) -> f64 {
    let v = to_f64(q);
    if from_f64(v) <= *q {
        v
    } else {
        next_down(v)
    }
}

/// Smallest f64 that is >= q.
pub fn to_f64_up(q: &BigRational) -> f64 {
    let v = to_f64(q);
    if from_f64(v) >= *q {
        v
    } else {
        next_up(v)
    }
}

pub fn next_up(v: f64) -> f64 {
    if v.is_nan() || v == f64::INFINITY {
        return v;
    }
    if v == 0.0 {
        return f64::from_bits(1);
    }
    let b = v.to_bits();
    if v > 0.0 {
        f64::from_bits(b + 1)
    } else {
        f64::from_bits(b - 1)
    }
}

pub fn next_down(v: f64) -> f64 {
    -next_up(-v)
}

pub fn from_f64(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float")
}

pub fn abs(q: &BigRational) -> BigRational {
    q.abs()
}

/// Decimal rendering with `digits` digits after the point, truncated toward -inf.
pub fn decimal(q: &BigRational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (q * BigRational::from_integer(scale.clone())).floor().to_integer();
    let neg = scaled.sign() == Sign::Minus;
    let mag = scaled.abs();
    let (ip, fp) = mag.div_rem(&scale);
    let mut frac = fp.to_string();
    while frac.len() < digits {
        frac.insert(0, '0');
    }
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{ip}")
    } else {
        format!("{sign}{ip}.{frac}")
    }
}

/// Like `decimal`, rounded toward +inf.
pub fn decimal_up(q: &BigRational, digits: usize) -> String {
    let s = decimal(&-q, digits);
    match s.strip_prefix('-') {
        Some(r) => r.to_string(),
        None if s.chars().all(|c| c == '0' || c == '.') => s,
        None => format!("-{s}"),
    }
}

pub fn format_rat(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parse `p`, `p/q` or a decimal such as `0.25`.
pub fn parse_rat(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().ok()?;
        let d: BigInt = b.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((a, b)) = s.split_once('.') {
        let neg = a.trim_start().starts_with('-');
        let ip: BigInt = if a.is_empty() || a == "-" { BigInt::zero() } else { a.parse().ok()? };
        if !b.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let fp: BigInt = if b.is_empty() { BigInt::zero() } else { b.parse().ok()? };
        let scale = BigInt::from(10u32).pow(b.len() as u32);
        let frac = BigRational::new(fp, scale);
        let whole = BigRational::from_integer(ip.abs());
        let mag = whole + frac;
        return Some(if neg { -mag } else { mag });
    }
    let n: BigInt = s.parse().ok()?;
    Some(BigRational::from_integer(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_bounds_bracket() {
        let two = int(2);
        let up = sqrt_upper(&two, 40);
        let lo = sqrt_lower(&two, 40);
        assert!(&up * &up >= two);
        assert!(&lo * &lo <= two);
        assert!(&up - &lo <= rat(1, 1 << 38));
    }

    #[test]
    fn directed_float_conversion() {
        let third = rat(1, 3);
        assert!(from_f64(to_f64_down(&third)) <= third);
        assert!(from_f64(to_f64_up(&third)) >= third);
    }

    #[test]
    fn decimals_and_parsing() {
        assert_eq!(decimal(&rat(-1, 8), 3), "-0.125");
        assert_eq!(decimal(&rat(1, 3), 4), "0.3333");
        assert_eq!(parse_rat("3/6"), Some(rat(1, 2)));
        assert_eq!(parse_rat("-0.25"), Some(rat(-1, 4)));
        assert_eq!(parse_rat("7"), Some(int(7)));
        assert_eq!(parse_rat("x"), None);
    }
}
