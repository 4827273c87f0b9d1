//! Purely periodic expansions, the finite set P = Pur(beta) ∩ Z[beta], the weak finiteness
//! property (W) and exclusive points.

use std::collections::HashMap;

use num_bigint::BigInt;
use serde::Serialize;

use crate::dynamics::{t_preimages, t_raw, t_step, ParryData};
use crate::error::{Error, Result};
use crate::field::{BetaField, FieldElement};
use crate::lattice;
use crate::report::{ser_elem, ser_elems};

/// Default cap on the number of orbit states visited by `is_purely_periodic`.
pub const PURITY_CAP: usize = 100_000;

#[derive(Clone, Debug, Serialize)]
pub struct PurityReport {
    #[serde(serialize_with = "ser_elem")]
    pub x: FieldElement,
    pub purely_periodic: bool,
    pub preperiod: usize,
    pub period: usize,
    /// `x, T(x), ..., T^{preperiod+period-1}(x)`.
    #[serde(serialize_with = "ser_elems")]
    pub orbit: Vec<FieldElement>,
}

pub fn is_purely_periodic(x: &FieldElement) -> Result<PurityReport> {
    is_purely_periodic_capped(x, PURITY_CAP)
}

/// Iterate T exactly until a state repeats.
pub fn is_purely_periodic_capped(x: &FieldElement, cap: usize) -> Result<PurityReport> {
    if !x.in_unit_interval()? {
        return Err(Error::OutOfDomain);
    }
    let f = x.field();
    let found = match x.to_i64_parts() {
        Some((num, den)) if den < (1 << 40) => orbit_i64(f, num, den, cap),
        _ => Err(Error::Overflow),
    };
    let (states, start) = match found {
        Ok((states, start)) => {
            let den = x.den().clone();
            let st = states
                .into_iter()
                .map(|v| FieldElement::new(f.clone(), v.into_iter().map(BigInt::from).collect(), den.clone()))
                .collect();
            (st, start)
        }
        Err(Error::Overflow) => orbit_big(x, cap)?,
        Err(e) => return Err(e),
    };
    let period = states.len() - start;
    Ok(PurityReport { x: x.clone(), purely_periodic: start == 0, preperiod: start, period, orbit: states })
}

/// States before the first repeat and the index where the cycle starts.
fn orbit_i64(f: &BetaField, mut v: Vec<i64>, den: i64, cap: usize) -> Result<(Vec<Vec<i64>>, usize)> {
    let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
    let mut states = Vec::new();
    loop {
        if let Some(&i) = seen.get(&v) {
            return Ok((states, i));
        }
        if states.len() >= cap {
            return Err(Error::IterationCapExceeded(cap));
        }
        seen.insert(v.clone(), states.len());
        states.push(v.clone());
        let mut y = f.mul_beta_i64(&v)?;
        let a = f.floor_i64(&y, den)?;
        y[0] = a.checked_mul(den).and_then(|t| y[0].checked_sub(t)).ok_or(Error::Overflow)?;
        v = y;
    }
}

fn orbit_big(x: &FieldElement, cap: usize) -> Result<(Vec<FieldElement>, usize)> {
    let mut seen: HashMap<FieldElement, usize> = HashMap::new();
    let mut states = Vec::new();
    let mut cur = x.clone();
    loop {
        if let Some(&i) = seen.get(&cur) {
            return Ok((states, i));
        }
        if states.len() >= cap {
            return Err(Error::IterationCapExceeded(cap));
        }
        seen.insert(cur.clone(), states.len());
        states.push(cur.clone());
        cur = t_raw(&cur)?.1;
    }
}

/// `T^n(x)` for `x` in `[0,1)`.
pub fn t_iter(x: &FieldElement, n: usize) -> Result<FieldElement> {
    let mut cur = x.clone();
    for _ in 0..n {
        cur = t_step(&cur)?;
    }
    Ok(cur)
}

/// Smallest `n <= cap` with `T^n(x) = 0`.
pub fn steps_to_zero(x: &FieldElement, cap: usize) -> Result<Option<usize>> {
    let mut cur = x.clone();
    for n in 0..=cap {
        if cur.is_zero() {
            return Ok(Some(n));
        }
        if n < cap {
            cur = t_step(&cur)?;
        }
    }
    Ok(None)
}

/// All purely periodic points of Z[beta] ∩ [0,1), ascending.
pub fn pur_set_integral(f: &BetaField) -> Result<Vec<FieldElement>> {
    let m = f.max_digit() as f64;
    let discs: Vec<_> = f
        .places()
        .iter()
        .map(|p| (num_complex::Complex64::new(0.0, 0.0), m / (1.0 - p.approx.norm())))
        .collect();
    let mut out = Vec::new();
    for v in lattice::scan(f, (0.0, 1.0), &discs, 10_000_000)? {
        let x = f.from_zvec(&v);
        if !x.in_unit_interval()? {
            continue;
        }
        if is_purely_periodic(&x)?.purely_periodic {
            out.push(x);
        }
    }
    crate::dynamics::sort_elements(&mut out)?;
    Ok(out)
}

/// `T^n(x + y) = T^n(y) = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "ser_elem")]
    pub x: FieldElement,
    #[serde(serialize_with = "ser_elem")]
    pub y: FieldElement,
    pub n: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct WReport {
    pub witnesses: Vec<Witness>,
    /// Points of P without a witness inside the search caps.
    #[serde(serialize_with = "ser_elems")]
    pub unknown: Vec<FieldElement>,
    pub y_depth: usize,
    pub n_cap: usize,
}

impl WReport {
    pub fn holds(&self) -> bool {
        self.unknown.is_empty()
    }
    pub fn witness(&self, x: &FieldElement) -> Option<&Witness> {
        self.witnesses.iter().find(|w| &w.x == x)
    }
}

/// Search a witness for every `x` in P: `y` runs through `T^{-m}(0)`, `m <= y_depth`;
/// the witness with the smallest `n`, then smallest depth, then smallest `y` is kept.
pub fn check_w(p: &[FieldElement], y_depth: usize, n_cap: usize) -> Result<WReport> {
    let mut witnesses = Vec::new();
    let mut unknown = Vec::new();
    let Some(first) = p.first() else {
        return Ok(WReport { witnesses, unknown, y_depth, n_cap });
    };
    let f = first.field().clone();
    // layers[m] = points of exact depth m
    let mut layers: Vec<Vec<FieldElement>> = vec![vec![f.zero()]];
    let mut all: std::collections::HashSet<FieldElement> = [f.zero()].into_iter().collect();
    for x in p {
        let mut best: Option<(usize, usize, FieldElement)> = None;
        let one_minus = &f.one() - x;
        for m in 0..=y_depth {
            if best.as_ref().is_some_and(|b| b.0 < m) {
                break;
            }
            while layers.len() <= m {
                let prev = layers.last().unwrap();
                let mut next = Vec::new();
                for y in prev {
                    for z in t_preimages(y, false)? {
                        if all.insert(z.clone()) {
                            next.push(z);
                        }
                    }
                }
                crate::dynamics::sort_elements(&mut next)?;
                layers.push(next);
            }
            for y in &layers[m] {
                if !y.lt(&one_minus)? {
                    break;
                }
                let cap = best.as_ref().map_or(n_cap, |b| b.0.min(n_cap));
                if let Some(n0) = steps_to_zero(&(x + y), cap)? {
                    let n = n0.max(m);
                    let better = match &best {
                        None => true,
                        Some(b) => (n, m) < (b.0, b.1),
                    };
                    if better {
                        best = Some((n, m, y.clone()));
                    }
                }
            }
        }
        match best {
            Some((n, _, y)) => witnesses.push(Witness { x: x.clone(), y, n }),
            None => unknown.push(x.clone()),
        }
    }
    Ok(WReport { witnesses, unknown, y_depth, n_cap })
}

/// An exclusive point `delta'(z)` of the aperiodic collection, inside R(0).
#[derive(Clone, Debug, Serialize)]
pub struct ExclusivePoint {
    #[serde(serialize_with = "ser_elem")]
    pub z: FieldElement,
    /// `n = k_1 + ... + k_h`.
    pub n: usize,
    #[serde(serialize_with = "ser_elems")]
    pub ys: Vec<FieldElement>,
    pub ks: Vec<usize>,
    /// `T^n(x + beta^{-n} z) = 0`, re-checked for each x in P.
    pub verified: bool,
}

const EXCL_SHIFT_CAP: usize = 40;
const EXCL_EXTRA_CAP: usize = 400;

/// Build `z = beta^{k_1+...+k_h} y_1 + ... + beta^{k_h} y_h` from (W) witnesses.
pub fn exclusive_point(parry: &ParryData, p: &[FieldElement], w: &WReport) -> Result<ExclusivePoint> {
    let f = &parry.field;
    let zero = f.zero();
    let xs: Vec<FieldElement> = p.iter().filter(|x| !x.is_zero()).cloned().collect();
    if xs.is_empty() {
        return Ok(ExclusivePoint { z: zero, n: 0, ys: vec![], ks: vec![], verified: true });
    }
    let hats: Vec<FieldElement> = p
        .iter()
        .map(|x| Ok(parry.successor(parry.interval_index(x)?).clone()))
        .collect::<Result<_>>()?;
    // cycle data: x -> (cycle max, offset from max to x, period)
    let mut cycle: HashMap<FieldElement, (FieldElement, usize, usize)> = HashMap::new();
    for x in p {
        let r = is_purely_periodic(x)?;
        let orbit = &r.orbit;
        let mut imax = 0;
        for i in 1..orbit.len() {
            if orbit[imax].lt(&orbit[i])? {
                imax = i;
            }
        }
        let off = (r.period - imax) % r.period;
        cycle.insert(x.clone(), (orbit[imax].clone(), off, r.period));
    }
    let in_p = |y: &FieldElement| p.contains(y);
    let mut s = zero.clone();
    let mut k_total = 0usize;
    let mut ys: Vec<FieldElement> = Vec::new();
    let mut ks: Vec<usize> = Vec::new();
    for j in 0..xs.len() {
        let u = t_iter(&(&xs[j] + &s), k_total)?;
        if !in_p(&u) {
            return Err(Error::ConstructionFailed(format!("T^{k_total}(x_{} + s) = {u} is not in P", j + 1)));
        }
        let mut chosen: Option<(FieldElement, usize)> = None;
        for shift in 0..=EXCL_SHIFT_CAP {
            let (y, k) = if shift == 0 {
                match w.witness(&u) {
                    Some(wt) => (wt.y.clone(), wt.n),
                    None => continue,
                }
            } else {
                let (xm, off, per) = &cycle[&u];
                let Some(wt) = w.witness(xm) else {
                    return Err(Error::ConstructionFailed(format!("no witness for {xm}")));
                };
                if shift * per < *off {
                    continue;
                }
                let e = shift * per - off;
                (wt.y.mul(&f.beta_pow(-(e as i64))), wt.n + e)
            };
            if y.sign()?.is_lt() || !(&u + &y).lt(&f.one())? {
                continue;
            }
            if !t_iter(&(&u + &y), k)?.is_zero() || !t_iter(&y, k)?.is_zero() {
                continue;
            }
            // x + sum_{i=l}^{j} y_i beta^{-(k_l+...+k_{i-1})} < x^ for all x in P and l <= j
            let mut ok = true;
            let mut acc = y.clone();
            for l in (0..=ys.len()).rev() {
                if l < ys.len() {
                    acc = &ys[l] + &acc.mul(&f.beta_pow(-(ks[l] as i64)));
                }
                for (x, xh) in p.iter().zip(&hats) {
                    if !(x + &acc).lt(xh)? {
                        ok = false;
                        break;
                    }
                }
                if !ok {
                    break;
                }
            }
            if !ok {
                continue;
            }
            chosen = Some((y, k));
            break;
        }
        let Some((y, k)) = chosen else {
            return Err(Error::ConstructionFailed(format!("no admissible y for x_{}", j + 1)));
        };
        let s_next = &s + &y.mul(&f.beta_pow(-(k_total as i64)));
        let mut kj = k;
        if j + 1 < xs.len() {
            let mut cur = t_iter(&(&xs[j + 1] + &s_next), k_total + k)?;
            let mut extra = 0;
            while !in_p(&cur) {
                if extra == EXCL_EXTRA_CAP {
                    return Err(Error::ConstructionFailed(format!("orbit of x_{} + s does not reach P", j + 2)));
                }
                cur = t_step(&cur)?;
                extra += 1;
            }
            kj += extra;
        }
        s = s_next;
        k_total += kj;
        ys.push(y);
        ks.push(kj);
    }
    let z = s.mul(&f.beta_pow(k_total as i64));
    let back = z.mul(&f.beta_pow(-(k_total as i64)));
    let mut verified = !z.sign()?.is_lt();
    for x in p {
        let t = &back + x;
        verified &= t.lt(&f.one())? && t_iter(&t, k_total)?.is_zero();
    }
    Ok(ExclusivePoint { z, n: k_total, ys, ks, verified })
}
