//! gamma(beta): the largest r such that every rational in [0,r) with denominator coprime to
//! N(beta) has a purely periodic expansion.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::boundary::build_boundary_graph;
use crate::dynamics::ParryData;
use crate::error::{Error, Result};
use crate::field::{BetaField, FieldElement, DEFAULT_BITS};
use crate::periodicity::is_purely_periodic;
use crate::rat;
use crate::report::{ser_opt_elem, ser_opt_rat, ser_opt_rat_pair, ser_rat};
use crate::tiles::{rauzy_cloud, tail_radius};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GammaMethod {
    QuadraticFormula,
    Thm5Numeric,
    Scan,
}

/// Outcome of a scan over rationals in increasing order.
#[derive(Clone, Debug, Serialize)]
pub struct ScanFrontier {
    pub max_den: u64,
    pub tested: usize,
    /// Largest tested rational below the first failure (all tested ones below it are pp).
    #[serde(serialize_with = "ser_opt_rat")]
    pub last_pp: Option<BigRational>,
    /// First rational, in increasing order, that is not purely periodic.
    #[serde(serialize_with = "ser_opt_rat")]
    pub first_non_pp: Option<BigRational>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaResult {
    pub method: GammaMethod,
    /// Closed form, when known.
    #[serde(serialize_with = "ser_opt_elem")]
    pub exact_value: Option<FieldElement>,
    /// Whether gamma(beta) equals `exact_value` (otherwise it is only a lower bound).
    pub equality: bool,
    /// Certified rational lower bound for gamma(beta).
    #[serde(serialize_with = "ser_rat")]
    pub lower_bound: BigRational,
    /// Certified enclosure of gamma(beta), or of the bound when `equality` is false.
    #[serde(serialize_with = "ser_opt_rat_pair")]
    pub enclosure: Option<(BigRational, BigRational)>,
    pub scan: Option<ScanFrontier>,
    pub notes: Vec<String>,
}

/// `max{0, 1 - (b-1) b beta / (beta^2 - b^2)}` for `beta^2 = a beta + b`, `a >= b >= 1`.
pub fn gamma_quadratic(a: i64, b: i64) -> Result<GammaResult> {
    if b < 1 || a < b {
        return Err(Error::BadParameters(format!("need a >= b >= 1, got a = {a}, b = {b}")));
    }
    let f = BetaField::new(&[BigInt::from(-b), BigInt::from(-a), BigInt::one()], DEFAULT_BITS)?;
    let beta = f.beta();
    let denom = &beta.mul(&beta) - &f.from_int(b * b);
    let t = &f.one() - &beta.mul_i64((b - 1) * b).mul(&denom.inv());
    let positive = (b - 1) * b < a;
    debug_assert_eq!(positive, t.sign()?.is_gt());
    let value = if positive { t } else { f.zero() };
    let enc = value.enclosure();
    let equality = a.gcd(&b) == 1;
    let mut notes = Vec::new();
    if !equality {
        notes.push(format!("gcd(a,b) = {} > 1: the value is a lower bound only", a.gcd(&b)));
    }
    if !positive {
        notes.push("(b-1)b >= a: the bound is 0".to_string());
    }
    Ok(GammaResult {
        method: GammaMethod::QuadraticFormula,
        exact_value: Some(value),
        equality,
        lower_bound: enc.0.clone(),
        enclosure: Some(enc),
        scan: None,
        notes,
    })
}

/// Reduced fractions `p/q` in `[0,1)` with `q <= n`, in increasing order.
pub struct Farey {
    n: u64,
    a: u64,
    b: u64,
    c: u64,
    d: u64,
    started: bool,
}

impl Farey {
    pub fn new(n: u64) -> Self {
        Farey { n: n.max(1), a: 0, b: 1, c: 1, d: n.max(1), started: false }
    }
}

impl Iterator for Farey {
    type Item = (u64, u64);
    fn next(&mut self) -> Option<(u64, u64)> {
        if !self.started {
            self.started = true;
            return Some((0, 1));
        }
        if self.c >= self.d {
            return None;
        }
        let out = (self.c, self.d);
        let k = (self.n + self.b) / self.d;
        let (e, g) = (k * self.c - self.a, k * self.d - self.b);
        self.a = self.c;
        self.b = self.d;
        self.c = e;
        self.d = g;
        Some(out)
    }
}

/// Test rationals in increasing order (denominators coprime to N(beta), up to `max_den`)
/// and stop at the first one that is not purely periodic.
pub fn gamma_scan(f: &BetaField, max_den: u64) -> Result<GammaResult> {
    if max_den < 2 {
        return Err(Error::BadParameters("max_den must be at least 2".into()));
    }
    let norm = f.abs_norm();
    let mut tested = 0;
    let mut last_pp = None;
    let mut first_non_pp = None;
    for (p, q) in Farey::new(max_den) {
        if q.gcd(&norm) != 1 {
            continue;
        }
        let x = f.from_ratio(p as i64, q as i64);
        tested += 1;
        let r = BigRational::new(BigInt::from(p), BigInt::from(q));
        if is_purely_periodic(&x)?.purely_periodic {
            last_pp = Some(r);
        } else {
            first_non_pp = Some(r);
            break;
        }
    }
    let mut notes = Vec::new();
    let shortcut = f.has_positive_real_conjugate();
    if shortcut {
        notes.push("beta has a positive real conjugate, so Pur(beta) ∩ Q = {0} and gamma = 0".into());
    }
    let hi = first_non_pp.clone().unwrap_or_else(BigRational::one);
    let zero = BigRational::zero();
    Ok(GammaResult {
        method: GammaMethod::Scan,
        exact_value: if shortcut { Some(f.zero()) } else { None },
        equality: shortcut,
        lower_bound: zero.clone(),
        enclosure: Some((zero.clone(), if shortcut { zero } else { hi })),
        scan: Some(ScanFrontier { max_den, tested, last_pp, first_non_pp }),
        notes,
    })
}

/// Sandwich for the right-hand side of the tile criterion for gamma.
#[derive(Clone, Debug, Serialize)]
pub struct Thm5Bound {
    pub level: usize,
    #[serde(serialize_with = "ser_rat")]
    pub lo: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub hi: BigRational,
    /// Upper bound from the outer box cover of the level-k clouds alone.
    #[serde(serialize_with = "ser_opt_rat")]
    pub cloud_hi: Option<BigRational>,
    /// Whether `lo` comes from the fibre endpoints (quadratic beta) rather than the trivial 0.
    pub inner_certified: bool,
    pub advisory: Vec<String>,
}

/// Approximate point budget for one cloud in the outer cover.
const CLOUD_BUDGET: f64 = 5e5;

/// Sorted disjoint closed intervals.
type Cover = Vec<(f64, f64)>;

fn merge(mut v: Vec<(f64, f64)>) -> Cover {
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Cover = Vec::new();
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn intersect(x: &Cover, y: &Cover) -> Cover {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < x.len() && j < y.len() {
        let a = x[i].0.max(y[j].0);
        let b = x[i].1.min(y[j].1);
        if a <= b {
            out.push((a, b));
        }
        if x[i].1 < y[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// First point of `[v, vhat)` outside the cover, if any.
fn first_escape(cover: &Cover, v: f64, vhat: f64) -> Option<f64> {
    let mut t = v;
    for &(a, b) in cover {
        if b < t {
            continue;
        }
        if a > t {
            return Some(t);
        }
        t = b;
    }
    (t < vhat).then_some(t)
}

/// Infimum of escaping rationals in `[v, vhat)` from the outer box cover of the level-k cloud.
fn cloud_escape(parry: &ParryData, i: usize, k: usize) -> Result<Option<f64>> {
    let f = &parry.field;
    let v = &parry.v[i];
    let cloud = rauzy_cloud(v, k)?;
    let r = tail_radius(f, k) * (1.0 + 1e-9) + 1e-12;
    let cv = v.conjugates();
    let places = f.places();
    // per cylinder: x-intervals where the diagonal point is within r of a cloud point
    let mut by_addr: std::collections::BTreeMap<Vec<u32>, Vec<(f64, f64)>> = Default::default();
    for (idx, p) in cloud.arch.iter().enumerate() {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        let mut c = 0;
        let mut ok = true;
        for (s, pl) in places.iter().enumerate() {
            let (re, im) = if pl.complex { (p[c], p[c + 1]) } else { (p[c], 0.0) };
            c += if pl.complex { 2 } else { 1 };
            let dy = cv[s].im - im;
            if dy.abs() > r {
                ok = false;
                break;
            }
            let h = (r * r - dy * dy).sqrt();
            let mid = cv[s].re - re;
            lo = lo.max(mid - h);
            hi = hi.min(mid + h);
        }
        if ok && lo <= hi {
            let key = cloud.addresses.as_ref().map(|a| a[idx].clone()).unwrap_or_default();
            by_addr.entry(key).or_default().push((lo, hi));
        }
    }
    let vf = v.to_f64();
    let vhat = parry.successor(i).to_f64();
    let cylinders = if f.is_unit() { 1.0 } else { (f.abs_norm() as f64).powi(k as i32) };
    if (by_addr.len() as f64) < cylinders {
        return Ok(Some(vf));
    }
    let mut cover: Option<Cover> = None;
    for (_, iv) in by_addr {
        let m = merge(iv);
        cover = Some(match cover {
            None => m,
            Some(c) => intersect(&c, &m),
        });
    }
    Ok(first_escape(&cover.unwrap_or_default(), vf, vhat))
}

/// Max and min of `sum a_j beta'^j` over infinite paths from each node (first labels),
/// as float enclosures `[(max_lo, max_hi, min_lo, min_hi)]`.
fn path_extremes(g: &crate::boundary::BoundaryGraph, conj: f64, bound: f64) -> Vec<(f64, f64, f64, f64)> {
    let n = g.len();
    let mut out: Vec<Vec<(i64, usize)>> = vec![Vec::new(); n];
    for e in &g.edges {
        out[e.from].push((e.a, e.to));
    }
    let mut cur = vec![(-bound, bound, -bound, bound); n];
    let pad = |x: f64| 1e-13 * (1.0 + x.abs());
    for _ in 0..2000 {
        let mut next = cur.clone();
        let mut width: f64 = 0.0;
        for i in 0..n {
            let mut mx = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            let mut mn = (f64::INFINITY, f64::INFINITY);
            for &(a, j) in &out[i] {
                let a = a as f64;
                let (xmax, xmin) = if conj < 0.0 {
                    // maximise a + conj*X by minimising X
                    ((a + conj * cur[j].3, a + conj * cur[j].2), (a + conj * cur[j].1, a + conj * cur[j].0))
                } else {
                    ((a + conj * cur[j].0, a + conj * cur[j].1), (a + conj * cur[j].2, a + conj * cur[j].3))
                };
                mx = (mx.0.max(xmax.0), mx.1.max(xmax.1));
                mn = (mn.0.min(xmin.0), mn.1.min(xmin.1));
            }
            if out[i].is_empty() {
                continue;
            }
            let t = (
                (mx.0 - pad(mx.0)).max(cur[i].0),
                (mx.1 + pad(mx.1)).min(cur[i].1),
                (mn.0 - pad(mn.0)).max(cur[i].2),
                (mn.1 + pad(mn.1)).min(cur[i].3),
            );
            width = width.max(t.1 - t.0).max(t.3 - t.2);
            next[i] = t;
        }
        cur = next;
        if width < 1e-11 {
            break;
        }
    }
    cur
}

/// `[lo, hi]` around `inf({1} ∪ {x in Q ∩ [v, v^) : delta'(v - x) escapes the fibres of R(v)})`.
pub fn gamma_lower_bound_thm5(parry: &ParryData, k: usize) -> Result<Thm5Bound> {
    if k == 0 {
        return Err(Error::LevelTooLow(0));
    }
    let f = &parry.field;
    let mut advisory = Vec::new();
    let mut cloud_hi: f64 = 1.0;
    let mut kc = k;
    while kc > 1 && f.beta_f64().powi(kc as i32) > CLOUD_BUDGET {
        kc -= 1;
    }
    if kc < k {
        advisory.push(format!("outer cover computed at level {kc} instead of {k}"));
    }
    for i in 0..parry.v.len() {
        if let Some(e) = cloud_escape(parry, i, kc)? {
            cloud_hi = cloud_hi.min(e);
        }
    }
    let cloud_hi_q = if cloud_hi < 1.0 { Some(rat::from_f64(rat::next_up(cloud_hi))) } else { None };
    if cloud_hi_q.is_none() {
        advisory.push(format!("LevelTooLow: no diagonal point escapes the level-{kc} cover"));
    }
    let mut lo = BigRational::zero();
    let mut hi = cloud_hi_q.clone().unwrap_or_else(BigRational::one);
    let mut inner = false;
    if f.degree() == 2 {
        match quadratic_fibres(parry) {
            Ok((l, h)) => {
                lo = rat::from_f64(rat::next_down(l.min(1.0)).max(0.0));
                let hq = rat::from_f64(rat::next_up(h.min(1.0)));
                if hq < hi {
                    hi = hq;
                }
                inner = true;
            }
            Err(e) => advisory.push(format!("fibre endpoints unavailable: {e}")),
        }
    } else {
        advisory.push("inner bound is only available for quadratic beta; lo = 0".into());
    }
    if lo > hi {
        advisory.push("inner and outer bounds disagree".into());
    }
    Ok(Thm5Bound { level: k, lo, hi, cloud_hi: cloud_hi_q, inner_certified: inner, advisory })
}

/// For quadratic beta each fibre of R(v) over the finite part is an interval whose endpoints
/// lie in R(v) ∩ R(y) (left) and R(v) ∩ R(z) (right), `y = v + beta - floor(v + beta)`,
/// `z = v - beta - floor(v - beta)`. Returns (lo, hi) for the infimum over v.
fn quadratic_fibres(parry: &ParryData) -> Result<(f64, f64)> {
    let f = &parry.field;
    let g = build_boundary_graph(parry)?;
    let conj = f.places()[0].approx.re;
    let bound = f.max_digit() as f64 / (1.0 - conj.abs()) * 1.01 + 1.0;
    let ext = path_extremes(&g, conj, bound);
    let beta = f.beta();
    let mut lo_all: f64 = 1.0;
    let mut hi_all: f64 = 1.0;
    for (i, v) in parry.v.iter().enumerate() {
        let y = {
            let s = v + &beta;
            s.add_int(-bigint_i64(&s.floor()?)?)
        };
        let z = {
            let s = v - &beta;
            s.add_int(-bigint_i64(&s.floor()?)?)
        };
        let find = |t: &FieldElement| -> Result<usize> {
            let w = parry.interval_index(t)?;
            g.find(Some(i), &(t - v), Some(w))
                .ok_or_else(|| Error::ConstructionFailed(format!("no boundary node [{v}, {}, .]", t - v)))
        };
        let (nl, nr) = (find(&y)?, find(&z)?);
        let c = v.conjugates()[0].re;
        let alpha = (c + ext[nl].0, c + ext[nl].1);
        let omega = (c + ext[nr].2, c + ext[nr].3);
        let vf = v.to_f64();
        let vhat = parry.successor(i).to_f64();
        let inf_e = |a: f64, o: f64| -> f64 {
            if vf < c - o || c - a < vf {
                vf
            } else if c - a < vhat {
                c - a
            } else {
                1.0
            }
        };
        lo_all = lo_all.min(inf_e(alpha.1, omega.0));
        hi_all = hi_all.min(inf_e(alpha.0, omega.1));
    }
    Ok((lo_all, hi_all))
}

fn bigint_i64(x: &BigInt) -> Result<i64> {
    num_traits::ToPrimitive::to_i64(x).ok_or(Error::Overflow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::parry_data;
    use crate::field::make_beta;

    #[test]
    fn farey_order() {
        let v: Vec<_> = Farey::new(4).collect();
        assert_eq!(v, vec![(0, 1), (1, 4), (1, 3), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(Farey::new(20).count(), 128);
    }

    #[test]
    fn quadratic_formula() {
        let g = gamma_quadratic(3, 2).unwrap();
        let v = g.exact_value.clone().unwrap();
        let f = v.field().clone();
        assert_eq!(v, f.parse_element("1/(b+2)").unwrap());
        assert!(g.equality);
        let (lo, hi) = g.enclosure.unwrap();
        assert!(rat::to_f64(&lo) < 0.17977 + 1e-4 && rat::to_f64(&hi) > 0.17977 - 1e-4);
        for a in 1..6 {
            let v = gamma_quadratic(a, 1).unwrap().exact_value.unwrap();
            assert_eq!(v, v.field().one());
        }
        let g = gamma_quadratic(2, 2).unwrap();
        assert!(!g.equality && g.exact_value.unwrap().is_zero());
        assert!(matches!(gamma_quadratic(1, 2), Err(Error::BadParameters(_))));
    }

    #[test]
    fn scans() {
        let f = make_beta("1,-1,-1", 128).unwrap();
        let s = gamma_scan(&f, 30).unwrap();
        assert!(s.scan.unwrap().first_non_pp.is_none());
        let f = make_beta("1,-3,1", 128).unwrap();
        let s = gamma_scan(&f, 20).unwrap();
        assert!(s.equality);
        assert_eq!(s.scan.unwrap().first_non_pp, Some(BigRational::new(1.into(), 20.into())));
    }

    #[test]
    fn thm5_quadratic() {
        let f = make_beta("1,-3,-2", 128).unwrap();
        let p = parry_data(&f).unwrap();
        let b = gamma_lower_bound_thm5(&p, 8).unwrap();
        let g = 1.0 / (f.beta_f64() + 2.0);
        assert!(b.inner_certified);
        assert!(rat::to_f64(&b.lo) <= g && g <= rat::to_f64(&b.hi), "{b:?}");
        assert!(rat::to_f64(&(&b.hi - &b.lo)) <= 0.02);
        let cloud_hi = rat::to_f64(b.cloud_hi.as_ref().unwrap());
        assert!(cloud_hi >= g);
        let f = make_beta("1,-1,-1", 128).unwrap();
        let p = parry_data(&f).unwrap();
        let b = gamma_lower_bound_thm5(&p, 6).unwrap();
        assert!(rat::to_f64(&b.lo) > 0.999);
    }
}
