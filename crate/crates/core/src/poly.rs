//! Integer and rational polynomials, coefficients stored lowest degree first.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Parse the user-facing form: comma separated, leading coefficient first, constant last.
/// `"1,-3,-2"` is x^2 - 3x - 2.
pub fn parse_poly(s: &str) -> Result<Vec<BigInt>> {
    let mut desc = Vec::new();
    for tok in s.split(',') {
        let t = tok.trim();
        if t.is_empty() {
            return Err(Error::Parse(format!("empty coefficient in '{s}'")));
        }
        let c: BigInt = t
            .parse()
            .map_err(|_| Error::Parse(format!("bad coefficient '{t}'")))?;
        desc.push(c);
    }
    while desc.len() > 1 && desc[0].is_zero() {
        desc.remove(0);
    }
    desc.reverse();
    Ok(desc)
}

pub fn format_poly(p: &[BigInt]) -> String {
    p.iter().rev().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

/// Human form such as `x^2 - 3x - 2`.
pub fn pretty_poly(p: &[BigInt], var: &str) -> String {
    let mut out = String::new();
    for (i, c) in p.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c.is_negative();
        let mag = c.abs();
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let coeff = if mag.is_one() && i > 0 { String::new() } else { mag.to_string() };
        out.push_str(&coeff);
        match i {
            0 => {}
            1 => out.push_str(var),
            _ => out.push_str(&format!("{var}^{i}")),
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

pub fn degree<T: Zero>(p: &[T]) -> usize {
    let mut d = p.len();
    while d > 1 && p[d - 1].is_zero() {
        d -= 1;
    }
    d.saturating_sub(1)
}

pub fn to_rat(p: &[BigInt]) -> Vec<BigRational> {
    p.iter().map(|c| BigRational::from_integer(c.clone())).collect()
}

fn trim(p: &mut Vec<BigRational>) {
    while p.len() > 1 && p.last().map_or(false, |c| c.is_zero()) {
        p.pop();
    }
}

pub fn eval_rat(p: &[BigInt], x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + BigRational::from_integer(c.clone());
    }
    acc
}

pub fn eval_int(p: &[BigInt], x: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

pub fn derivative(p: &[BigInt]) -> Vec<BigInt> {
    if p.len() <= 1 {
        return vec![BigInt::zero()];
    }
    p.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect()
}

/// Quotient and remainder over Q.
pub fn divrem_rat(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r: Vec<BigRational> = a.to_vec();
    trim(&mut r);
    let mut b = b.to_vec();
    trim(&mut b);
    let db = b.len() - 1;
    let lead = b[db].clone();
    assert!(!lead.is_zero(), "division by zero polynomial");
    if r.len() - 1 < db {
        return (vec![BigRational::zero()], r);
    }
    let dr = r.len() - 1;
    let mut q = vec![BigRational::zero(); dr - db + 1];
    for k in (0..=dr - db).rev() {
        let f = &r[k + db] / &lead;
        if !f.is_zero() {
            for (i, bc) in b.iter().enumerate() {
                r[k + i] = &r[k + i] - &f * bc;
            }
        }
        q[k] = f;
    }
    r.truncate(db.max(1));
    trim(&mut r);
    trim(&mut q);
    (q, r)
}

pub fn is_zero_poly(p: &[BigRational]) -> bool {
    p.iter().all(|c| c.is_zero())
}

/// Monic gcd over Q.
pub fn gcd_rat(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !is_zero_poly(&y) {
        let (_, r) = divrem_rat(&x, &y);
        x = y;
        y = r;
    }
    trim(&mut x);
    let lead = x.last().cloned().unwrap_or_else(BigRational::one);
    if !lead.is_zero() {
        for c in x.iter_mut() {
            *c = &*c / &lead;
        }
    }
    x
}

/// Exact division over Z; `None` when `b` does not divide `a`.
pub fn div_exact_int(a: &[BigInt], b: &[BigInt]) -> Option<Vec<BigInt>> {
    let (q, r) = divrem_rat(&to_rat(a), &to_rat(b));
    if !is_zero_poly(&r) {
        return None;
    }
    q.iter()
        .map(|c| if c.is_integer() { Some(c.to_integer()) } else { None })
        .collect()
}

/// True when `x^d p(1/x) = ±p(x)`.
pub fn is_self_reciprocal(p: &[BigInt]) -> bool {
    let d = degree(p);
    let rev: Vec<BigInt> = p[..=d].iter().rev().cloned().collect();
    let same = rev.iter().zip(p.iter()).all(|(a, b)| a == b);
    let anti = rev.iter().zip(p.iter()).all(|(a, b)| *a == -b);
    same || anti
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn parse_is_leading_first() {
        assert_eq!(parse_poly("1,-3,-2").unwrap(), ints(&[-2, -3, 1]));
        assert!(parse_poly("1,,2").is_err());
        assert_eq!(pretty_poly(&ints(&[-2, -3, 1]), "x"), "x^2 - 3x - 2");
        assert_eq!(format_poly(&ints(&[-2, -3, 1])), "1,-3,-2");
    }

    #[test]
    fn gcd_detects_square_factor() {
        // (x-1)^2 (x+2)
        let p = ints(&[2, -3, 0, 1]);
        let g = gcd_rat(&to_rat(&p), &to_rat(&derivative(&p)));
        assert_eq!(degree(&g), 1);
    }

    #[test]
    fn exact_division() {
        let p = ints(&[-6, -1, 1]); // (x-3)(x+2)
        assert_eq!(div_exact_int(&p, &ints(&[-3, 1])), Some(ints(&[2, 1])));
        assert_eq!(div_exact_int(&p, &ints(&[-1, 1])), None);
    }

    #[test]
    fn reciprocal_detection() {
        assert!(is_self_reciprocal(&ints(&[1, -3, 1])));
        assert!(!is_self_reciprocal(&ints(&[-1, -1, 1])));
    }
}
