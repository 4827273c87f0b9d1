//! The number field Q(beta) for a Pisot unit or non-unit beta.
//!
//! Elements are integer coefficient vectors over the power basis `1, beta, ..., beta^(d-1)`
//! with one positive common denominator. Every comparison is exact: equality is read off
//! the coefficients, and strict order comes from a certified enclosure of beta that is
//! refined on demand.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly;
use crate::rat::{self, sqrt_upper};
use crate::roots::{self, CRat, RootDisk};

/// Default working precision of the beta enclosure, in bits.
pub const DEFAULT_BITS: u32 = 128;
/// Maximum number of precision doublings before a comparison gives up.
pub const REFINE_CAP: u32 = 16;
/// Largest power of beta tried when testing membership in Z[1/beta].
pub const BETA_INV_CAP: usize = 64;

const U: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53

/// A non-dominant archimedean place: a real conjugate, or one member of a complex pair.
#[derive(Clone, Debug)]
pub struct Place {
    pub disk: RootDisk,
    pub complex: bool,
    pub approx: Complex64,
}

struct FieldInner {
    poly: Vec<BigInt>,
    poly_i64: Option<Vec<i64>>,
    d: usize,
    norm: BigInt,
    floor_beta: i64,
    bits: u32,
    beta_lo: BigRational,
    beta_hi: BigRational,
    pow_lo: Vec<BigRational>,
    pow_hi: Vec<BigRational>,
    pow_mid: Vec<f64>,
    pow_rad: Vec<f64>,
    beta_f64: f64,
    places: Vec<Place>,
}

/// Q(beta) together with certified data about beta and its conjugates.
/// Cloning is cheap; the data is shared and never mutated.
#[derive(Clone)]
pub struct BetaField {
    inner: Arc<FieldInner>,
}

impl fmt::Debug for BetaField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BetaField({})", poly::pretty_poly(&self.inner.poly, "x"))
    }
}

impl PartialEq for BetaField {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.poly == other.inner.poly
    }
}

/// Build the field from a polynomial given leading coefficient first, e.g. `"1,-3,-2"`.
pub fn make_beta(poly_str: &str, bits: u32) -> Result<BetaField> {
    let p = poly::parse_poly(poly_str)?;
    BetaField::new(&p, bits)
}

fn disk_mul(a: &(CRat, BigRational), b: &(CRat, BigRational), bits: u32) -> (CRat, BigRational) {
    let ma = sqrt_upper(&a.0.norm_sqr(), bits);
    let mb = sqrt_upper(&b.0.norm_sqr(), bits);
    let r = &ma * &b.1 + &mb * &a.1 + &a.1 * &b.1;
    (a.0.mul(&b.0), r)
}

/// Look for a proper factor by multiplying subsets of the isolated roots.
fn find_factor(p: &[BigInt], disks: &[RootDisk]) -> Option<Vec<BigInt>> {
    let n = disks.len();
    if n > 20 {
        return None;
    }
    let approx: Vec<Complex64> = disks.iter().map(|d| d.approx()).collect();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    for mask in 1u32..(1u32 << n) {
        let m = mask.count_ones() as usize;
        if m == 0 || m > n / 2 {
            continue;
        }
        // cheap screen in floating point
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for (i, z) in approx.iter().enumerate() {
            if mask & (1 << i) != 0 {
                let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
                for (k, ck) in c.iter().enumerate() {
                    next[k + 1] += *ck;
                    next[k] -= *ck * z;
                }
                c = next;
            }
        }
        let scale: f64 = approx.iter().map(|z| 1.0 + z.norm()).product();
        let tol = 1e-6 * scale;
        if c.iter().any(|ck| ck.im.abs() > tol || (ck.re - ck.re.round()).abs() > tol) {
            continue;
        }
        // rigorous check with disk arithmetic, then exact division
        let mut dc: Vec<(CRat, BigRational)> = vec![(CRat::real(BigRational::one()), BigRational::zero())];
        for (i, d) in disks.iter().enumerate() {
            if mask & (1 << i) != 0 {
                let neg = (CRat::zero().sub(&d.center), d.radius.clone());
                let mut next = vec![(CRat::zero(), BigRational::zero()); dc.len() + 1];
                for (k, ck) in dc.iter().enumerate() {
                    next[k + 1].0 = next[k + 1].0.add(&ck.0);
                    next[k + 1].1 = &next[k + 1].1 + &ck.1;
                    let prod = disk_mul(ck, &neg, 64);
                    next[k].0 = next[k].0.add(&prod.0);
                    next[k].1 = &next[k].1 + &prod.1;
                }
                dc = next;
            }
        }
        let mut cand = Vec::with_capacity(dc.len());
        let mut ok = true;
        for (c, r) in &dc {
            if r >= &half {
                ok = false;
                break;
            }
            let n0 = c.re.round();
            let diff = CRat { re: &c.re - &n0, im: c.im.clone() };
            if diff.norm_sqr() > r * r {
                ok = false;
                break;
            }
            cand.push(n0.to_integer());
        }
        if ok && poly::div_exact_int(p, &cand).is_some() {
            return Some(cand);
        }
    }
    None
}

fn pow_interval(lo: &BigRational, hi: &BigRational, k: usize) -> (BigRational, BigRational) {
    let mut a = BigRational::one();
    let mut b = BigRational::one();
    for _ in 0..k {
        a *= lo;
        b *= hi;
    }
    (a, b)
}

impl BetaField {
    /// Validate `p` (coefficients lowest degree first) and build the field.
    pub fn new(p: &[BigInt], bits: u32) -> Result<BetaField> {
        let bits = bits.max(64);
        let mut p = p.to_vec();
        while p.len() > 1 && p.last().map_or(false, |c| c.is_zero()) {
            p.pop();
        }
        let d = p.len().saturating_sub(1);
        if d < 2 {
            return Err(Error::DegreeTooSmall);
        }
        if !p[d].is_one() {
            return Err(Error::NotMonic);
        }
        if p[0].is_zero() {
            return Err(Error::NotIrreducible("x".into()));
        }
        let g = poly::gcd_rat(&poly::to_rat(&p), &poly::to_rat(&poly::derivative(&p)));
        if poly::degree(&g) > 0 {
            let gi: Vec<BigInt> = g.iter().map(|c| c.to_integer()).collect();
            return Err(Error::NotIrreducible(poly::pretty_poly(&gi, "x")));
        }
        let mut disks = roots::isolate_roots(&p, bits).ok_or(Error::PrecisionExhausted)?;
        // rational roots of a monic integer polynomial are integers
        for dk in disks.iter().filter(|dk| dk.center.is_real()) {
            let n = dk.center.re.round().to_integer();
            if poly::eval_int(&p, &n).is_zero() {
                let f = vec![-n, BigInt::one()];
                return Err(Error::NotIrreducible(poly::pretty_poly(&f, "x")));
            }
        }
        if let Some(f) = find_factor(&p, &disks) {
            return Err(Error::NotIrreducible(poly::pretty_poly(&f, "x")));
        }
        if poly::is_self_reciprocal(&p) && d > 2 {
            return Err(Error::NotPisot("reciprocal polynomial of degree above 2".into()));
        }
        // classify every root against the unit circle
        let mut b = bits;
        let mut outside;
        let mut inside;
        let mut rounds = 0;
        loop {
            outside = disks.iter().filter(|dk| dk.outside_unit()).count();
            inside = disks.iter().filter(|dk| dk.inside_unit()).count();
            if outside + inside == d {
                break;
            }
            rounds += 1;
            if rounds > 6 {
                return Err(Error::NotPisot("a root lies on or too near the unit circle".into()));
            }
            b *= 2;
            disks = roots::isolate_roots(&p, b).ok_or(Error::PrecisionExhausted)?;
        }
        if outside != 1 {
            return Err(Error::NotPisot(format!("{outside} roots outside the unit disk")));
        }
        let dom_idx = disks.iter().position(|dk| dk.outside_unit()).unwrap();
        let dom = disks[dom_idx].clone();
        if !dom.center.is_real() || dom.center.re <= BigRational::one() {
            return Err(Error::NotPisot("dominant root is not a real number above 1".into()));
        }
        let lo0 = &dom.center.re - &dom.radius;
        let hi0 = &dom.center.re + &dom.radius;
        let s_lo = poly::eval_rat(&p, &lo0).signum();
        let s_hi = poly::eval_rat(&p, &hi0).signum();
        if s_lo == s_hi || s_lo.is_zero() {
            return Err(Error::PrecisionExhausted);
        }
        let (beta_lo, beta_hi) = roots::bisect_real(&p, &lo0, &hi0, bits);
        let mut places: Vec<Place> = Vec::new();
        for (i, dk) in disks.iter().enumerate() {
            if i == dom_idx {
                continue;
            }
            if dk.center.is_real() {
                places.push(Place { disk: dk.clone(), complex: false, approx: dk.approx() });
            } else if dk.center.im.is_positive() {
                places.push(Place { disk: dk.clone(), complex: true, approx: dk.approx() });
            }
        }
        // deterministic place order: real places by value, then complex by real part
        places.sort_by(|a, b| {
            (a.complex, a.approx.re, a.approx.im)
                .partial_cmp(&(b.complex, b.approx.re, b.approx.im))
                .unwrap_or(Ordering::Equal)
        });
        let mut pow_lo = Vec::with_capacity(d);
        let mut pow_hi = Vec::with_capacity(d);
        let mut pow_mid = Vec::with_capacity(d);
        let mut pow_rad = Vec::with_capacity(d);
        for i in 0..d {
            let (a, c) = pow_interval(&beta_lo, &beta_hi, i);
            let mid = rat::to_f64(&((&a + &c) / BigRational::from_integer(BigInt::from(2))));
            let midr = rat::from_f64(mid);
            let dev = std::cmp::max((&c - &midr).abs(), (&midr - &a).abs());
            pow_rad.push(rat::to_f64_up(&dev));
            pow_mid.push(mid);
            pow_lo.push(a);
            pow_hi.push(c);
        }
        let floor_beta = beta_lo.floor().to_integer();
        if beta_hi.floor().to_integer() != floor_beta {
            return Err(Error::PrecisionExhausted);
        }
        let norm = if d % 2 == 0 { p[0].clone() } else { -p[0].clone() };
        let poly_i64 = p.iter().map(|c| c.to_i64()).collect::<Option<Vec<i64>>>();
        let beta_f64 = rat::to_f64(&((&beta_lo + &beta_hi) / BigRational::from_integer(BigInt::from(2))));
        Ok(BetaField {
            inner: Arc::new(FieldInner {
                poly: p,
                poly_i64,
                d,
                norm,
                floor_beta: floor_beta.to_i64().ok_or(Error::Overflow)?,
                bits,
                beta_lo,
                beta_hi,
                pow_lo,
                pow_hi,
                pow_mid,
                pow_rad,
                beta_f64,
                places,
            }),
        })
    }

    pub fn from_str_poly(s: &str) -> Result<BetaField> {
        make_beta(s, DEFAULT_BITS)
    }

    /// Minimal polynomial, lowest degree first.
    pub fn min_poly(&self) -> &[BigInt] {
        &self.inner.poly
    }
    pub fn poly_string(&self) -> String {
        poly::format_poly(&self.inner.poly)
    }
    pub fn pretty(&self) -> String {
        poly::pretty_poly(&self.inner.poly, "x")
    }
    pub fn degree(&self) -> usize {
        self.inner.d
    }
    /// N(beta) = (-1)^d p(0).
    pub fn norm(&self) -> &BigInt {
        &self.inner.norm
    }
    pub fn abs_norm(&self) -> u64 {
        self.inner.norm.abs().to_u64().unwrap_or(u64::MAX)
    }
    pub fn is_unit(&self) -> bool {
        self.inner.norm.abs().is_one()
    }
    /// Largest digit, equal to ceil(beta) - 1.
    pub fn max_digit(&self) -> i64 {
        self.inner.floor_beta
    }
    /// The digit alphabet `{0, ..., ceil(beta)-1}`.
    pub fn alphabet(&self) -> Vec<i64> {
        (0..=self.inner.floor_beta).collect()
    }
    pub fn precision_bits(&self) -> u32 {
        self.inner.bits
    }
    pub fn beta_enclosure(&self) -> (BigRational, BigRational) {
        (self.inner.beta_lo.clone(), self.inner.beta_hi.clone())
    }
    pub fn beta_f64(&self) -> f64 {
        self.inner.beta_f64
    }
    pub fn places(&self) -> &[Place] {
        &self.inner.places
    }
    /// Dimension of the archimedean part of the contracting space.
    pub fn arch_dim(&self) -> usize {
        self.inner.places.iter().map(|p| if p.complex { 2 } else { 1 }).sum()
    }
    pub fn has_positive_real_conjugate(&self) -> bool {
        self.inner.places.iter().any(|p| {
            !p.complex && p.disk.center.re > p.disk.radius
        })
    }
    /// Rational upper bound for `max_sigma |beta^sigma|` over non-dominant places.
    pub fn max_conj_abs_upper(&self) -> BigRational {
        self.inner
            .places
            .iter()
            .map(|p| p.disk.abs_upper(self.inner.bits))
            .max()
            .unwrap_or_else(BigRational::zero)
    }
    pub fn max_conj_abs_f64(&self) -> f64 {
        self.inner.places.iter().map(|p| p.approx.norm()).fold(0.0, f64::max)
    }
    pub fn beta_f64_conj(&self) -> Vec<Complex64> {
        self.inner.places.iter().map(|p| p.approx).collect()
    }

    // ---- element constructors ----

    pub fn zero(&self) -> FieldElement {
        FieldElement::from_parts(self.clone(), vec![BigInt::zero(); self.inner.d], BigInt::one())
    }
    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }
    pub fn beta(&self) -> FieldElement {
        let mut v = vec![BigInt::zero(); self.inner.d];
        v[1] = BigInt::one();
        FieldElement::from_parts(self.clone(), v, BigInt::one())
    }
    pub fn from_int(&self, n: i64) -> FieldElement {
        let mut v = vec![BigInt::zero(); self.inner.d];
        v[0] = BigInt::from(n);
        FieldElement::from_parts(self.clone(), v, BigInt::one())
    }
    pub fn from_rational(&self, q: &BigRational) -> FieldElement {
        let mut v = vec![BigInt::zero(); self.inner.d];
        v[0] = q.numer().clone();
        FieldElement::new(self.clone(), v, q.denom().clone())
    }
    pub fn from_ratio(&self, p: i64, q: i64) -> FieldElement {
        self.from_rational(&BigRational::new(BigInt::from(p), BigInt::from(q)))
    }
    /// Element from power-basis coefficients `c_0 + c_1 beta + ...`; higher powers are reduced.
    pub fn from_coeffs(&self, c: &[BigRational]) -> FieldElement {
        let mut acc = self.zero();
        for q in c.iter().rev() {
            acc = &acc.mul_beta() + &self.from_rational(q);
        }
        acc
    }
    pub fn from_i64_coeffs(&self, c: &[i64]) -> FieldElement {
        let q: Vec<BigRational> = c.iter().map(|&x| rat::int(x)).collect();
        self.from_coeffs(&q)
    }
    /// Integral element from a reduced i64 vector of length d.
    pub fn from_zvec(&self, v: &[i64]) -> FieldElement {
        debug_assert_eq!(v.len(), self.inner.d);
        FieldElement::from_parts(self.clone(), v.iter().map(|&x| BigInt::from(x)).collect(), BigInt::one())
    }
    pub fn beta_pow(&self, k: i64) -> FieldElement {
        let mut e = self.one();
        if k >= 0 {
            for _ in 0..k {
                e = e.mul_beta();
            }
        } else {
            for _ in 0..(-k) {
                e = e.div_beta();
            }
        }
        e
    }

    /// Parse an expression in `b` (beta), e.g. `b-3`, `1/7`, `b^2-2*b+1`, `(b-3)/7`.
    pub fn parse_element(&self, s: &str) -> Result<FieldElement> {
        let mut p = ExprParser { s: s.as_bytes(), i: 0, f: self };
        let e = p.expr()?;
        p.skip_ws();
        if p.i != p.s.len() {
            return Err(Error::Parse(format!("trailing input in '{s}'")));
        }
        Ok(e)
    }

    // ---- sign machinery ----

    fn fast_sign(&self, vals: &[f64]) -> Option<Ordering> {
        let inn = &self.inner;
        let mut s = 0.0;
        let mut mag = 0.0;
        let mut rad = 0.0;
        for (i, &n) in vals.iter().enumerate() {
            s += n * inn.pow_mid[i];
            mag += n.abs() * inn.pow_mid[i].abs();
            rad += n.abs() * inn.pow_rad[i];
        }
        let err = (mag * (inn.d as f64 + 4.0) * 2.0 * U + rad) * (1.0 + 1e-9) + f64::MIN_POSITIVE;
        if s > err {
            Some(Ordering::Greater)
        } else if s < -err {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    fn interval_sign(&self, num: &[BigInt], lo: &[BigRational], hi: &[BigRational]) -> Option<Ordering> {
        let mut a = BigRational::zero();
        let mut b = BigRational::zero();
        for (i, n) in num.iter().enumerate() {
            if n.is_zero() {
                continue;
            }
            let q = BigRational::from_integer(n.clone());
            if n.is_positive() {
                a += &q * &lo[i];
                b += &q * &hi[i];
            } else {
                a += &q * &hi[i];
                b += &q * &lo[i];
            }
        }
        if a.is_positive() {
            Some(Ordering::Greater)
        } else if b.is_negative() {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    /// Sign of `sum num_i beta^i` for integer coefficients.
    pub fn sign_big(&self, num: &[BigInt]) -> Result<Ordering> {
        if num.iter().all(|c| c.is_zero()) {
            return Ok(Ordering::Equal);
        }
        let small: Option<Vec<f64>> = num
            .iter()
            .map(|c| c.to_i64().filter(|x| x.unsigned_abs() < (1u64 << 53)).map(|x| x as f64))
            .collect();
        if let Some(v) = small {
            if let Some(o) = self.fast_sign(&v) {
                return Ok(o);
            }
        }
        let inn = &self.inner;
        if let Some(o) = self.interval_sign(num, &inn.pow_lo, &inn.pow_hi) {
            return Ok(o);
        }
        let mut lo = inn.beta_lo.clone();
        let mut hi = inn.beta_hi.clone();
        let mut bits = inn.bits;
        for _ in 0..REFINE_CAP {
            bits = bits.saturating_mul(2);
            let (l, h) = roots::bisect_real(&inn.poly, &lo, &hi, bits);
            lo = l;
            hi = h;
            let mut plo = Vec::with_capacity(inn.d);
            let mut phi = Vec::with_capacity(inn.d);
            for i in 0..inn.d {
                let (a, b) = pow_interval(&lo, &hi, i);
                plo.push(a);
                phi.push(b);
            }
            if let Some(o) = self.interval_sign(num, &plo, &phi) {
                return Ok(o);
            }
        }
        Err(Error::PrecisionExhausted)
    }

    /// Sign of `sum v_i beta^i` for an i64 coefficient vector.
    pub fn sign_i64(&self, v: &[i64]) -> Result<Ordering> {
        if v.iter().all(|&c| c == 0) {
            return Ok(Ordering::Equal);
        }
        if v.iter().all(|c| c.unsigned_abs() < (1u64 << 53)) {
            let f: Vec<f64> = v.iter().map(|&c| c as f64).collect();
            if let Some(o) = self.fast_sign(&f) {
                return Ok(o);
            }
        }
        let b: Vec<BigInt> = v.iter().map(|&c| BigInt::from(c)).collect();
        self.sign_big(&b)
    }

    /// Floor of `(sum num_i beta^i) / den` with `den > 0`.
    pub fn floor_of(&self, num: &[BigInt], den: &BigInt) -> Result<BigInt> {
        if num[1..].iter().all(|c| c.is_zero()) {
            return Ok(num[0].div_floor(den));
        }
        let approx = self.approx_value(num, den);
        let mut cand = if approx.is_finite() && approx.abs() < 9e15 {
            BigInt::from(approx.floor() as i64)
        } else {
            self.interval_value(num, den).0.floor().to_integer()
        };
        loop {
            // need cand <= x < cand + 1, i.e. num - cand*den >= 0 and num - (cand+1)*den < 0
            let mut t = num.to_vec();
            t[0] = &num[0] - &cand * den;
            match self.sign_big(&t)? {
                Ordering::Less => {
                    cand -= 1;
                    continue;
                }
                _ => {}
            }
            t[0] = &t[0] - den;
            match self.sign_big(&t)? {
                Ordering::Less => return Ok(cand),
                _ => cand += 1,
            }
        }
    }

    /// Floor of `(sum v_i beta^i) / den` for i64 data.
    pub fn floor_i64(&self, v: &[i64], den: i64) -> Result<i64> {
        if v[1..].iter().all(|&c| c == 0) {
            return Ok(v[0].div_euclid(den));
        }
        let inn = &self.inner;
        if v.iter().all(|c| c.unsigned_abs() < (1u64 << 53)) && den.unsigned_abs() < (1u64 << 53) {
            let mut s = 0.0;
            let mut mag = 0.0;
            let mut rad = 0.0;
            for (i, &n) in v.iter().enumerate() {
                let n = n as f64;
                s += n * inn.pow_mid[i];
                mag += n.abs() * inn.pow_mid[i].abs();
                rad += n.abs() * inn.pow_rad[i];
            }
            let err = (mag * (inn.d as f64 + 6.0) * 2.0 * U + rad) * (1.0 + 1e-9) + f64::MIN_POSITIVE;
            let den_f = den as f64;
            let x = s / den_f;
            let e = err / den_f + x.abs() * 4.0 * U;
            let f = x.floor();
            if x - e >= f && x + e < f + 1.0 {
                return Ok(f as i64);
            }
        }
        let b: Vec<BigInt> = v.iter().map(|&c| BigInt::from(c)).collect();
        self.floor_of(&b, &BigInt::from(den))?.to_i64().ok_or(Error::Overflow)
    }

    pub fn approx_value(&self, num: &[BigInt], den: &BigInt) -> f64 {
        let inn = &self.inner;
        let mut s = 0.0;
        for (i, n) in num.iter().enumerate() {
            s += rat::to_f64(&BigRational::from_integer(n.clone())) * inn.pow_mid[i];
        }
        let df = rat::to_f64(&BigRational::from_integer(den.clone()));
        if s.is_finite() && df.is_finite() && df != 0.0 {
            s / df
        } else {
            let (a, b) = self.interval_value(num, den);
            rat::to_f64(&((a + b) / BigRational::from_integer(BigInt::from(2))))
        }
    }

    pub fn approx_value_i64(&self, v: &[i64]) -> f64 {
        v.iter().zip(&self.inner.pow_mid).map(|(&n, m)| n as f64 * m).sum()
    }

    /// Rational interval containing `(sum num_i beta^i) / den`.
    pub fn interval_value(&self, num: &[BigInt], den: &BigInt) -> (BigRational, BigRational) {
        let inn = &self.inner;
        let mut a = BigRational::zero();
        let mut b = BigRational::zero();
        for (i, n) in num.iter().enumerate() {
            let q = BigRational::from_integer(n.clone());
            if n.is_negative() {
                a += &q * &inn.pow_hi[i];
                b += &q * &inn.pow_lo[i];
            } else {
                a += &q * &inn.pow_lo[i];
                b += &q * &inn.pow_hi[i];
            }
        }
        let dq = BigRational::from_integer(den.clone());
        (a / &dq, b / dq)
    }

    // ---- fixed-width kernels used by the hot loops ----

    fn poly_i64(&self) -> Result<&[i64]> {
        self.inner.poly_i64.as_deref().ok_or(Error::Overflow)
    }

    /// beta * v for an integral element held as i64 coefficients.
    pub fn mul_beta_i64(&self, v: &[i64]) -> Result<Vec<i64>> {
        let p = self.poly_i64()?;
        let d = self.inner.d;
        let top = v[d - 1];
        let mut out = vec![0i64; d];
        for i in (1..d).rev() {
            out[i] = v[i - 1];
        }
        if top != 0 {
            for i in 0..d {
                let t = top.checked_mul(p[i]).ok_or(Error::Overflow)?;
                out[i] = out[i].checked_sub(t).ok_or(Error::Overflow)?;
            }
        }
        Ok(out)
    }

    /// `v / beta` when the result is integral.
    pub fn div_beta_i64(&self, v: &[i64]) -> Result<Vec<i64>> {
        let p = self.poly_i64()?;
        let d = self.inner.d;
        let c0 = p[0];
        if v[0] % c0 != 0 {
            return Err(Error::NotIntegral);
        }
        let q = v[0] / c0;
        let mut out = vec![0i64; d];
        for j in 0..d {
            let nxt = if j + 1 < d { v[j + 1] } else { 0 };
            let t = q.checked_mul(p[j + 1]).ok_or(Error::Overflow)?;
            out[j] = nxt.checked_sub(t).ok_or(Error::Overflow)?;
        }
        Ok(out)
    }

    /// Residue of `v[0]` in `{0, ..., |N|-1}`, which is `v mod beta`.
    pub fn residue_i64(&self, v: &[i64]) -> Result<i64> {
        let n = self.poly_i64()?[0].abs();
        Ok(v[0].rem_euclid(n))
    }

    /// `beta^k` as i64 coefficients.
    pub fn beta_pow_i64(&self, k: usize) -> Result<Vec<i64>> {
        let mut v = vec![0i64; self.inner.d];
        v[0] = 1;
        for _ in 0..k {
            v = self.mul_beta_i64(&v)?;
        }
        Ok(v)
    }

    /// Conjugate values of an i64 vector at every non-dominant place.
    pub fn conj_i64(&self, v: &[i64]) -> Vec<Complex64> {
        self.inner
            .places
            .iter()
            .map(|pl| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &c in v.iter().rev() {
                    acc = acc * pl.approx + c as f64;
                }
                acc
            })
            .collect()
    }

    pub fn arch_from_conj(&self, c: &[Complex64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.arch_dim());
        for (pl, z) in self.inner.places.iter().zip(c) {
            out.push(z.re);
            if pl.complex {
                out.push(z.im);
            }
        }
        out
    }

    /// Float matrix sending power-basis coefficients to (real value, archimedean coordinates).
    pub fn embedding_matrix(&self) -> Vec<Vec<f64>> {
        // rows: dominant place, then arch coordinates; columns: basis powers
        let d = self.inner.d;
        let mut rows = Vec::with_capacity(d);
        rows.push((0..d).map(|i| self.inner.beta_f64.powi(i as i32)).collect());
        for pl in &self.inner.places {
            let pw: Vec<Complex64> = (0..d).map(|i| pl.approx.powu(i as u32)).collect();
            rows.push(pw.iter().map(|z| z.re).collect());
            if pl.complex {
                rows.push(pw.iter().map(|z| z.im).collect());
            }
        }
        rows
    }
}

/// Repeated comparisons `u - x` against one fixed element `x`, with `u` integral.
pub struct ShiftComparator {
    field: BetaField,
    x: FieldElement,
    lo: f64,
    hi: f64,
}

impl ShiftComparator {
    pub fn new(x: &FieldElement) -> Self {
        let (a, b) = x.enclosure();
        ShiftComparator { field: x.field().clone(), x: x.clone(), lo: rat::to_f64_down(&a), hi: rat::to_f64_up(&b) }
    }

    /// Sign of `u - x`.
    pub fn sign(&self, u: &[i64]) -> Result<Ordering> {
        let inn = &self.field.inner;
        if u.iter().all(|c| c.unsigned_abs() < (1u64 << 53)) && self.lo.is_finite() && self.hi.is_finite() {
            let mut s = 0.0;
            let mut mag = 0.0;
            let mut rad = 0.0;
            for (i, &n) in u.iter().enumerate() {
                let n = n as f64;
                s += n * inn.pow_mid[i];
                mag += n.abs() * inn.pow_mid[i].abs();
                rad += n.abs() * inn.pow_rad[i];
            }
            let err = (mag * (inn.d as f64 + 4.0) * 2.0 * U + rad) * (1.0 + 1e-9) + f64::MIN_POSITIVE;
            let slack = (s.abs() + self.hi.abs()) * 4.0 * U;
            if s - err - self.hi - slack > 0.0 {
                return Ok(Ordering::Greater);
            }
            if s + err - self.lo + slack < 0.0 {
                return Ok(Ordering::Less);
            }
        }
        (&self.field.from_zvec(u) - &self.x).sign()
    }
}

struct ExprParser<'a> {
    s: &'a [u8],
    i: usize,
    f: &'a BetaField,
}

impl<'a> ExprParser<'a> {
    fn skip_ws(&mut self) {
        while self.i < self.s.len() && (self.s[self.i] as char).is_whitespace() {
            self.i += 1;
        }
    }
    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.i).copied()
    }
    fn err(&self) -> Error {
        Error::Parse(format!(
            "unexpected input at byte {} of '{}'",
            self.i,
            String::from_utf8_lossy(self.s)
        ))
    }
    fn expr(&mut self) -> Result<FieldElement> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            if c == b'+' {
                self.i += 1;
                acc = &acc + &self.term()?;
            } else if c == b'-' {
                self.i += 1;
                acc = &acc - &self.term()?;
            } else {
                break;
            }
        }
        Ok(acc)
    }
    fn term(&mut self) -> Result<FieldElement> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.i += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(b'/') => {
                    self.i += 1;
                    let r = self.unary()?;
                    if r.is_zero() {
                        return Err(Error::Parse("division by zero".into()));
                    }
                    acc = &acc * &r.inv();
                }
                // implicit product such as `2b`
                Some(c) if c == b'b' || c == b'(' => {
                    acc = &acc * &self.unary()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }
    fn unary(&mut self) -> Result<FieldElement> {
        if self.peek() == Some(b'-') {
            self.i += 1;
            return Ok(-&self.unary()?);
        }
        if self.peek() == Some(b'+') {
            self.i += 1;
        }
        self.power()
    }
    fn power(&mut self) -> Result<FieldElement> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.i += 1;
            let neg = if self.peek() == Some(b'-') {
                self.i += 1;
                true
            } else {
                false
            };
            let start = self.i;
            while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                self.i += 1;
            }
            let k: u32 = std::str::from_utf8(&self.s[start..self.i])
                .ok()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| self.err())?;
            let mut r = self.f.one();
            for _ in 0..k {
                r = &r * &base;
            }
            if neg {
                if r.is_zero() {
                    return Err(Error::Parse("division by zero".into()));
                }
                r = r.inv();
            }
            return Ok(r);
        }
        Ok(base)
    }
    fn atom(&mut self) -> Result<FieldElement> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err());
                }
                self.i += 1;
                Ok(e)
            }
            Some(b'b') => {
                self.i += 1;
                if self.s[self.i..].starts_with(b"eta") {
                    self.i += 3;
                }
                Ok(self.f.beta())
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.i;
                while self.i < self.s.len() && (self.s[self.i].is_ascii_digit() || self.s[self.i] == b'.') {
                    self.i += 1;
                }
                let t = std::str::from_utf8(&self.s[start..self.i]).unwrap();
                let q = rat::parse_rat(t).ok_or_else(|| self.err())?;
                Ok(self.f.from_rational(&q))
            }
            _ => Err(self.err()),
        }
    }
}

/// An exact element of Q(beta).
#[derive(Clone)]
pub struct FieldElement {
    field: BetaField,
    num: Vec<BigInt>,
    den: BigInt,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.num == other.num && self.den == other.den
    }
}
impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pretty())
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pretty())
    }
}

impl FieldElement {
    fn from_parts(field: BetaField, num: Vec<BigInt>, den: BigInt) -> Self {
        FieldElement { field, num, den }
    }

    /// Normalising constructor: positive denominator, coprime with the numerators.
    pub fn new(field: BetaField, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if den.is_negative() {
            den = -den;
            for c in num.iter_mut() {
                *c = -&*c;
            }
        }
        let mut g = den.clone();
        for c in &num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if !g.is_one() && !g.is_zero() {
            for c in num.iter_mut() {
                *c = &*c / &g;
            }
            den = &den / &g;
        }
        FieldElement { field, num, den }
    }

    pub fn field(&self) -> &BetaField {
        &self.field
    }
    pub fn num(&self) -> &[BigInt] {
        &self.num
    }
    pub fn den(&self) -> &BigInt {
        &self.den
    }
    pub fn coeffs(&self) -> Vec<BigRational> {
        self.num.iter().map(|c| BigRational::new(c.clone(), self.den.clone())).collect()
    }
    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }
    /// Membership in Z[beta].
    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }
    pub fn is_rational(&self) -> bool {
        self.num[1..].iter().all(|c| c.is_zero())
    }
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.is_rational() {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }
    /// Membership in Z[1/beta], tested up to `BETA_INV_CAP` powers.
    pub fn in_z_beta_inv(&self) -> bool {
        let mut e = self.clone();
        for _ in 0..=BETA_INV_CAP {
            if e.is_integral() {
                return true;
            }
            e = e.mul_beta();
        }
        false
    }
    pub fn to_i64_vec(&self) -> Option<Vec<i64>> {
        if !self.is_integral() {
            return None;
        }
        self.num.iter().map(|c| c.to_i64()).collect()
    }
    pub fn to_i64_parts(&self) -> Option<(Vec<i64>, i64)> {
        let v: Option<Vec<i64>> = self.num.iter().map(|c| c.to_i64()).collect();
        Some((v?, self.den.to_i64()?))
    }

    pub fn to_f64(&self) -> f64 {
        self.field.approx_value(&self.num, &self.den)
    }
    pub fn enclosure(&self) -> (BigRational, BigRational) {
        self.field.interval_value(&self.num, &self.den)
    }
    /// Values at each non-dominant place (one entry per real place or complex pair).
    pub fn conjugates(&self) -> Vec<Complex64> {
        let den = rat::to_f64(&BigRational::from_integer(self.den.clone()));
        self.field
            .inner
            .places
            .iter()
            .map(|pl| {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in self.num.iter().rev() {
                    acc = acc * pl.approx + rat::to_f64(&BigRational::from_integer(c.clone()));
                }
                acc / den
            })
            .collect()
    }
    /// Real coordinates of the image in the archimedean contracting space.
    pub fn arch_coords(&self) -> Vec<f64> {
        self.field.arch_from_conj(&self.conjugates())
    }
    /// Max over places of |x^sigma|.
    pub fn conj_norm(&self) -> f64 {
        self.conjugates().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
    /// Certified disk around the value at place `idx`: (center, radius).
    pub fn conj_disk(&self, idx: usize) -> (CRat, BigRational) {
        let pl = &self.field.inner.places[idx];
        let bits = self.field.inner.bits;
        let c = &pl.disk.center;
        let mut val = CRat::zero();
        for n in self.num.iter().rev() {
            val = val.mul(c);
            val.re += BigRational::from_integer(n.clone());
        }
        let cabs = sqrt_upper(&c.norm_sqr(), bits);
        let big = &cabs + &pl.disk.radius;
        let mut rad = BigRational::zero();
        let mut pa = BigRational::one();
        let mut pb = BigRational::one();
        for n in self.num.iter() {
            rad += BigRational::from_integer(n.abs()) * (&pb - &pa);
            pa *= &cabs;
            pb *= &big;
        }
        let dq = BigRational::from_integer(self.den.clone());
        (val.scale(&(BigRational::one() / &dq)), rad / dq)
    }

    pub fn sign(&self) -> Result<Ordering> {
        self.field.sign_big(&self.num)
    }
    pub fn cmp_exact(&self, other: &FieldElement) -> Result<Ordering> {
        (self - other).sign()
    }
    pub fn lt(&self, other: &FieldElement) -> Result<bool> {
        Ok(self.cmp_exact(other)? == Ordering::Less)
    }
    pub fn le(&self, other: &FieldElement) -> Result<bool> {
        Ok(self.cmp_exact(other)? != Ordering::Greater)
    }
    pub fn floor(&self) -> Result<BigInt> {
        self.field.floor_of(&self.num, &self.den)
    }
    pub fn in_unit_interval(&self) -> Result<bool> {
        if self.sign()? == Ordering::Less {
            return Ok(false);
        }
        Ok((self - &self.field.one()).sign()? == Ordering::Less)
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement::from_parts(self.field.clone(), self.num.iter().map(|c| -c).collect(), self.den.clone())
    }
    pub fn mul_int(&self, k: &BigInt) -> FieldElement {
        FieldElement::new(self.field.clone(), self.num.iter().map(|c| c * k).collect(), self.den.clone())
    }
    pub fn mul_i64(&self, k: i64) -> FieldElement {
        self.mul_int(&BigInt::from(k))
    }
    pub fn add_int(&self, k: i64) -> FieldElement {
        let mut num = self.num.clone();
        num[0] += BigInt::from(k) * &self.den;
        FieldElement::from_parts(self.field.clone(), num, self.den.clone())
    }
    pub fn div_int(&self, k: &BigInt) -> FieldElement {
        FieldElement::new(self.field.clone(), self.num.clone(), &self.den * k)
    }
    pub fn mul_rational(&self, q: &BigRational) -> FieldElement {
        FieldElement::new(
            self.field.clone(),
            self.num.iter().map(|c| c * q.numer()).collect(),
            &self.den * q.denom(),
        )
    }
    pub fn mul_beta(&self) -> FieldElement {
        let p = &self.field.inner.poly;
        let d = self.field.inner.d;
        let top = self.num[d - 1].clone();
        let mut out = vec![BigInt::zero(); d];
        for i in (1..d).rev() {
            out[i] = self.num[i - 1].clone();
        }
        if !top.is_zero() {
            for i in 0..d {
                out[i] -= &top * &p[i];
            }
        }
        FieldElement::new(self.field.clone(), out, self.den.clone())
    }
    pub fn div_beta(&self) -> FieldElement {
        let p = &self.field.inner.poly;
        let d = self.field.inner.d;
        let c0 = &p[0];
        let n0 = &self.num[0];
        let mut out = vec![BigInt::zero(); d];
        for j in 0..d {
            let nxt = if j + 1 < d { self.num[j + 1].clone() } else { BigInt::zero() };
            out[j] = c0 * nxt - n0 * &p[j + 1];
        }
        FieldElement::new(self.field.clone(), out, &self.den * c0)
    }
    pub fn mul(&self, o: &FieldElement) -> FieldElement {
        let d = self.field.inner.d;
        let p = &self.field.inner.poly;
        let mut prod = vec![BigInt::zero(); 2 * d - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.num.iter().enumerate() {
                prod[i + j] += a * b;
            }
        }
        for k in (d..2 * d - 1).rev() {
            let t = std::mem::take(&mut prod[k]);
            if t.is_zero() {
                continue;
            }
            for i in 0..d {
                prod[k - d + i] -= &t * &p[i];
            }
        }
        prod.truncate(d);
        FieldElement::new(self.field.clone(), prod, &self.den * &o.den)
    }
    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> FieldElement {
        assert!(!self.is_zero(), "inverse of zero");
        let d = self.field.inner.d;
        // columns of the multiplication matrix: x * beta^j
        let mut cols: Vec<Vec<BigRational>> = Vec::with_capacity(d);
        let mut e = FieldElement::from_parts(self.field.clone(), self.num.clone(), BigInt::one());
        for _ in 0..d {
            cols.push(e.num.iter().map(|c| BigRational::from_integer(c.clone())).collect());
            e = e.mul_beta();
        }
        // solve M y = e_0 (scaled by den)
        let mut m: Vec<Vec<BigRational>> = (0..d)
            .map(|r| {
                let mut row: Vec<BigRational> = (0..d).map(|c| cols[c][r].clone()).collect();
                row.push(if r == 0 { BigRational::one() } else { BigRational::zero() });
                row
            })
            .collect();
        for c in 0..d {
            let piv = (c..d).find(|&r| !m[r][c].is_zero()).expect("singular multiplication matrix");
            m.swap(c, piv);
            let pv = m[c][c].clone();
            for k in c..=d {
                m[c][k] = &m[c][k] / &pv;
            }
            for r in 0..d {
                if r != c && !m[r][c].is_zero() {
                    let f = m[r][c].clone();
                    for k in c..=d {
                        let t = &f * &m[c][k];
                        m[r][k] = &m[r][k] - t;
                    }
                }
            }
        }
        let y: Vec<BigRational> = (0..d).map(|r| &m[r][d] * BigRational::from_integer(self.den.clone())).collect();
        self.field.from_coeffs(&y)
    }

    /// Compact textual form in `b`, e.g. `b - 3` or `(2b + 1)/7`.
    pub fn pretty(&self) -> String {
        let body = poly::pretty_poly(&self.num, "b");
        if self.den.is_one() {
            body
        } else if self.num.iter().filter(|c| !c.is_zero()).count() <= 1 {
            format!("{body}/{}", self.den)
        } else {
            format!("({body})/{}", self.den)
        }
    }
    /// Coefficients as strings `p/q`, lowest power first.
    pub fn coeff_strings(&self) -> Vec<String> {
        self.coeffs().iter().map(rat::format_rat).collect()
    }
}

macro_rules! bin_op {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a, 'b> std::ops::$tr<&'b FieldElement> for &'a FieldElement {
            type Output = FieldElement;
            fn $m(self, o: &'b FieldElement) -> FieldElement {
                let f: fn(&FieldElement, &FieldElement) -> FieldElement = $body;
                f(self, o)
            }
        }
        impl std::ops::$tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: FieldElement) -> FieldElement {
                let f: fn(&FieldElement, &FieldElement) -> FieldElement = $body;
                f(&self, &o)
            }
        }
    };
}

fn add_impl(a: &FieldElement, b: &FieldElement, sub: bool) -> FieldElement {
    if a.den == b.den {
        let num = a
            .num
            .iter()
            .zip(&b.num)
            .map(|(x, y)| if sub { x - y } else { x + y })
            .collect();
        return FieldElement::new(a.field.clone(), num, a.den.clone());
    }
    let num = a
        .num
        .iter()
        .zip(&b.num)
        .map(|(x, y)| {
            let l = x * &b.den;
            let r = y * &a.den;
            if sub {
                l - r
            } else {
                l + r
            }
        })
        .collect();
    FieldElement::new(a.field.clone(), num, &a.den * &b.den)
}

bin_op!(Add, add, |a, b| add_impl(a, b, false));
bin_op!(Sub, sub, |a, b| add_impl(a, b, true));
bin_op!(Mul, mul, |a, b| FieldElement::mul(a, b));

impl std::ops::Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(self)
    }
}
impl std::ops::Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        FieldElement::neg(&self)
    }
}

/// Exact comparison of two field elements.
pub fn compare(a: &FieldElement, b: &FieldElement) -> Result<Ordering> {
    a.cmp_exact(b)
}

/// floor(beta * x).
pub fn floor_mul_beta(x: &FieldElement) -> Result<BigInt> {
    x.mul_beta().floor()
}

/// Digits `d_0, ..., d_{k-1}` in `{0, ..., |N|-1}` with `x = d_0 + d_1 beta + ... + beta^k x_k`,
/// `x_k` in Z[beta]. Empty when beta is a unit.
pub fn finite_address(x: &FieldElement, k: usize) -> Result<Vec<u32>> {
    if !x.is_integral() {
        return Err(Error::NotIntegral);
    }
    let f = x.field();
    let n = f.norm().abs();
    if n.is_one() {
        return Ok(Vec::new());
    }
    let mut cur = x.clone();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let dgt = cur.num()[0].mod_floor(&n);
        out.push(dgt.to_u32().ok_or(Error::Overflow)?);
        cur = cur.add_int(-dgt.to_i64().ok_or(Error::Overflow)?).div_beta();
        debug_assert!(cur.is_integral());
    }
    Ok(out)
}

/// Digits as above for an i64 vector (integral element).
pub fn finite_address_i64(f: &BetaField, v: &[i64], k: usize) -> Result<Vec<u32>> {
    if f.is_unit() {
        return Ok(Vec::new());
    }
    let mut cur = v.to_vec();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let dgt = f.residue_i64(&cur)?;
        out.push(dgt as u32);
        cur[0] -= dgt;
        cur = f.div_beta_i64(&cur)?;
    }
    Ok(out)
}

/// Encoded value `sum_j d_j |N|^(-j-1)` of an address.
pub fn address_value(addr: &[u32], base: u64) -> f64 {
    let b = base as f64;
    let mut s = 0.0;
    let mut w = 1.0 / b;
    for &d in addr {
        s += d as f64 * w;
        w /= b;
    }
    s
}
