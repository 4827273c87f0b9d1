//! Certified isolation of all complex roots of a squarefree monic integer polynomial.
//!
//! Roots are first approximated in f64 (Aberth iteration), polished by Newton steps in
//! exact dyadic arithmetic and then enclosed in disks of radius `n |W_i|`, where
//! `W_i = p(z_i) / prod_{j != i} (z_i - z_j)` is the Weierstrass correction. When the
//! disks are pairwise disjoint each one holds exactly one root.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::rat::{self, round_dyadic, sqrt_upper};

/// Complex number with rational parts.
#[derive(Clone, Debug, PartialEq)]
pub struct CRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl CRat {
    pub fn zero() -> Self {
        CRat { re: BigRational::zero(), im: BigRational::zero() }
    }
    pub fn real(re: BigRational) -> Self {
        CRat { re, im: BigRational::zero() }
    }
    pub fn add(&self, o: &CRat) -> CRat {
        CRat { re: &self.re + &o.re, im: &self.im + &o.im }
    }
    pub fn sub(&self, o: &CRat) -> CRat {
        CRat { re: &self.re - &o.re, im: &self.im - &o.im }
    }
    pub fn mul(&self, o: &CRat) -> CRat {
        CRat {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    pub fn scale(&self, k: &BigRational) -> CRat {
        CRat { re: &self.re * k, im: &self.im * k }
    }
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
    pub fn div(&self, o: &CRat) -> CRat {
        let n = o.norm_sqr();
        let conj = CRat { re: o.re.clone(), im: -o.im.clone() };
        let p = self.mul(&conj);
        CRat { re: p.re / &n, im: p.im / n }
    }
    pub fn conj(&self) -> CRat {
        CRat { re: self.re.clone(), im: -self.im.clone() }
    }
    pub fn round(&self, bits: u32) -> CRat {
        CRat { re: round_dyadic(&self.re, bits), im: round_dyadic(&self.im, bits) }
    }
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(rat::to_f64(&self.re), rat::to_f64(&self.im))
    }
    pub fn from_c64(z: Complex64) -> CRat {
        CRat { re: rat::from_f64(z.re), im: rat::from_f64(z.im) }
    }
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }
}

/// A closed disk known to contain exactly one root.
#[derive(Clone, Debug, PartialEq)]
pub struct RootDisk {
    pub center: CRat,
    pub radius: BigRational,
}

impl RootDisk {
    pub fn approx(&self) -> Complex64 {
        self.center.to_c64()
    }
    /// Upper bound for |z| over the disk.
    pub fn abs_upper(&self, bits: u32) -> BigRational {
        sqrt_upper(&self.center.norm_sqr(), bits) + &self.radius
    }
    /// Certified: every point of the disk has modulus < 1.
    pub fn inside_unit(&self) -> bool {
        let one = BigRational::one();
        if self.radius >= one {
            return false;
        }
        let m = &one - &self.radius;
        self.center.norm_sqr() < &m * &m
    }
    /// Certified: every point of the disk has modulus > 1.
    pub fn outside_unit(&self) -> bool {
        let m = BigRational::one() + &self.radius;
        self.center.norm_sqr() > &m * &m
    }
}

pub fn eval_c(p: &[BigInt], z: &CRat) -> CRat {
    let mut acc = CRat::zero();
    for c in p.iter().rev() {
        acc = acc.mul(z);
        acc.re += BigRational::from_integer(c.clone());
    }
    acc
}

fn eval_c64(p: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = Complex64::new(0.0, 0.0);
    let mut dv = Complex64::new(0.0, 0.0);
    for &c in p.iter().rev() {
        dv = dv * z + v;
        v = v * z + c;
    }
    (v, dv)
}

/// Aberth–Ehrlich iteration in double precision.
pub fn approx_roots(p: &[BigInt]) -> Vec<Complex64> {
    let n = p.len() - 1;
    let pf: Vec<f64> = p.iter().map(|c| rat::to_f64(&BigRational::from_integer(c.clone()))).collect();
    let bound = 1.0
        + pf[..n]
            .iter()
            .map(|c| c.abs())
            .fold(0.0_f64, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            Complex64::from_polar(0.5 * bound, ang)
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0_f64;
        for i in 0..n {
            let (v, dv) = eval_c64(&pf, z[i]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / dv;
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += Complex64::new(1.0, 0.0) / (z[i] - z[j]);
                }
            }
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

fn newton_polish(p: &[BigInt], dp: &[BigInt], z: &CRat, bits: u32) -> CRat {
    let mut cur = z.clone();
    let tol = BigRational::new(BigInt::one(), rat::pow2(bits));
    let tol2 = &tol * &tol;
    for _ in 0..(2 * (32 - bits.leading_zeros()) + 8) {
        let v = eval_c(p, &cur);
        let dv = eval_c(dp, &cur);
        if dv.norm_sqr().is_zero() {
            break;
        }
        let step = v.div(&dv);
        let next = cur.sub(&step).round(bits + 8);
        let small = step.norm_sqr() < tol2;
        cur = next;
        if small {
            break;
        }
    }
    cur
}

/// Snap approximations that look real onto the real axis and make complex roots come in
/// exact conjugate pairs.
fn symmetrize(z: &[Complex64]) -> Vec<Complex64> {
    let n = z.len();
    let mut out = z.to_vec();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        let zi = out[i];
        if zi.im.abs() <= 1e-7 * (1.0 + zi.norm()) {
            out[i] = Complex64::new(zi.re, 0.0);
            used[i] = true;
            continue;
        }
        // partner: closest to conj
        let target = zi.conj();
        let mut best = None;
        let mut bd = f64::INFINITY;
        for j in 0..n {
            if j != i && !used[j] {
                let d = (out[j] - target).norm();
                if d < bd {
                    bd = d;
                    best = Some(j);
                }
            }
        }
        used[i] = true;
        if let Some(j) = best {
            used[j] = true;
            let avg = (zi + out[j].conj()) * 0.5;
            let up = if avg.im > 0.0 { avg } else { avg.conj() };
            out[i] = up;
            out[j] = up.conj();
        }
    }
    out
}

/// Isolate every root of `p` (monic, squarefree) at `bits` bits of precision.
/// Returns `None` when the disks fail to separate at this precision.
pub fn certify_roots(p: &[BigInt], approx: &[Complex64], bits: u32) -> Option<Vec<RootDisk>> {
    let n = p.len() - 1;
    let dp = crate::poly::derivative(p);
    let mut centers: Vec<CRat> = Vec::with_capacity(n);
    let sym = symmetrize(approx);
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] {
            continue;
        }
        let c = newton_polish(p, &dp, &CRat::from_c64(sym[i]), bits);
        let c = if sym[i].im == 0.0 { CRat::real(c.re) } else { c };
        centers.push(c.clone());
        done[i] = true;
        if sym[i].im != 0.0 {
            if let Some(j) = (0..n).find(|&j| !done[j] && sym[j] == sym[i].conj()) {
                done[j] = true;
                centers.push(c.conj());
            }
        }
    }
    if centers.len() != n {
        return None;
    }
    let nn = BigRational::from_integer(BigInt::from(n as u64));
    let mut radii = Vec::with_capacity(n);
    for i in 0..n {
        let num = eval_c(p, &centers[i]).norm_sqr();
        let mut den = BigRational::one();
        for j in 0..n {
            if j != i {
                den *= centers[i].sub(&centers[j]).norm_sqr();
            }
        }
        if den.is_zero() {
            return None;
        }
        let w = sqrt_upper(&(num / den), bits + 16);
        radii.push(&nn * w);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let d2 = centers[i].sub(&centers[j]).norm_sqr();
            let rr = &radii[i] + &radii[j];
            if d2 <= &rr * &rr {
                return None;
            }
        }
    }
    Some(
        centers
            .into_iter()
            .zip(radii)
            .map(|(center, radius)| RootDisk { center, radius })
            .collect(),
    )
}

/// Isolate roots, raising precision until the disks separate and are no wider than 2^-bits.
pub fn isolate_roots(p: &[BigInt], bits: u32) -> Option<Vec<RootDisk>> {
    let approx = approx_roots(p);
    let target = BigRational::new(BigInt::one(), rat::pow2(bits));
    let mut b = bits.max(64);
    for _ in 0..6 {
        if let Some(disks) = certify_roots(p, &approx, b) {
            if disks.iter().all(|d| d.radius <= target) {
                return Some(disks);
            }
        }
        b *= 2;
    }
    None
}

/// Bisect a real root inside `[lo, hi]`, where `p(lo)` and `p(hi)` have opposite signs,
/// until the interval is no wider than 2^-bits.
pub fn bisect_real(p: &[BigInt], lo: &BigRational, hi: &BigRational, bits: u32) -> (BigRational, BigRational) {
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let slo = crate::poly::eval_rat(p, &lo).signum();
    let tol = BigRational::new(BigInt::one(), rat::pow2(bits));
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    while &hi - &lo > tol {
        let mid = (&lo + &hi) * &half;
        let s = crate::poly::eval_rat(p, &mid).signum();
        if s.is_zero() {
            return (mid.clone(), mid);
        }
        if s == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn quadratic_roots_separate() {
        let p = ints(&[-2, -3, 1]);
        let d = isolate_roots(&p, 80).unwrap();
        let mut re: Vec<f64> = d.iter().map(|r| r.approx().re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[1] - (3.0 + 17f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((re[0] - (3.0 - 17f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!(d.iter().all(|r| r.center.is_real()));
    }

    #[test]
    fn cubic_with_complex_pair() {
        let p = ints(&[-1, -1, 0, 1]);
        let d = isolate_roots(&p, 100).unwrap();
        assert_eq!(d.iter().filter(|r| r.center.is_real()).count(), 1);
        let cx: Vec<_> = d.iter().filter(|r| !r.center.is_real()).collect();
        assert_eq!(cx.len(), 2);
        assert_eq!(cx[0].center, cx[1].center.conj());
        assert!(cx[0].inside_unit());
    }

    #[test]
    fn bisection_brackets_root() {
        let p = ints(&[-2, 0, 1]);
        let (lo, hi) = bisect_real(&p, &rat::int(1), &rat::int(2), 60);
        assert!(&lo * &lo <= rat::int(2) && &hi * &hi >= rat::int(2));
    }
}
