//! The beta-transformation `T(x) = beta x - floor(beta x)` and the data derived from the
//! orbit of 1: the sets V and V^, the successor map and the lattice L.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{BetaField, FieldElement};
use crate::lattice;

/// Cap on the orbit length when looking for a cycle in the expansion of 1.
pub const PARRY_CYCLE_CAP: usize = 10_000;

/// One step of the beta-transformation on `[0,1)`.
pub fn t_step(x: &FieldElement) -> Result<FieldElement> {
    if !x.in_unit_interval()? {
        return Err(Error::OutOfDomain);
    }
    Ok(t_raw(x)?.1)
}

/// `(floor(beta x), beta x - floor(beta x))` without a domain check.
pub(crate) fn t_raw(x: &FieldElement) -> Result<(BigInt, FieldElement)> {
    let y = x.mul_beta();
    let a = y.floor()?;
    let r = y.add_int(-a.to_i64().ok_or(Error::Overflow)?);
    Ok((a, r))
}

/// First `n` greedy digits of `x` in `[0,1)`.
pub fn greedy_expansion(x: &FieldElement, n: usize) -> Result<Vec<u32>> {
    if !x.in_unit_interval()? {
        return Err(Error::OutOfDomain);
    }
    let mut cur = x.clone();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let (a, r) = t_raw(&cur)?;
        out.push(a.to_u32().ok_or(Error::Overflow)?);
        cur = r;
    }
    Ok(out)
}

/// An eventually periodic digit sequence `preperiod (period)^inf`; an empty period means the
/// expansion is finite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Expansion {
    pub preperiod: Vec<u32>,
    pub period: Vec<u32>,
}

impl Expansion {
    pub fn is_finite(&self) -> bool {
        self.period.is_empty()
    }
    /// First `n` digits, padding finite expansions with zeros.
    pub fn digits(&self, n: usize) -> Vec<u32> {
        let mut out = Vec::with_capacity(n);
        let mut i = 0;
        while out.len() < n {
            if i < self.preperiod.len() {
                out.push(self.preperiod[i]);
            } else if self.period.is_empty() {
                out.push(0);
            } else {
                out.push(self.period[(i - self.preperiod.len()) % self.period.len()]);
            }
            i += 1;
        }
        out
    }
    pub fn render(&self) -> String {
        let pre: Vec<String> = self.preperiod.iter().map(|d| d.to_string()).collect();
        let per: Vec<String> = self.period.iter().map(|d| d.to_string()).collect();
        if per.is_empty() {
            pre.join(",")
        } else if pre.is_empty() {
            format!("({})^inf", per.join(","))
        } else {
            format!("{},({})^inf", pre.join(","), per.join(","))
        }
    }
}

/// Everything derived from the beta-expansion of 1.
#[derive(Clone, Debug)]
pub struct ParryData {
    pub field: BetaField,
    /// Greedy expansion d(1).
    pub expansion_of_one: Expansion,
    /// Quasi-greedy expansion d*(1), always purely periodic.
    pub quasi_greedy: Expansion,
    /// V^ = {T^k(1-)}, ascending; its largest element is 1.
    pub v_hat: Vec<FieldElement>,
    /// V = (V^ minus {1}) plus {0}, ascending.
    pub v: Vec<FieldElement>,
    /// For each index of `v`, the index in `v_hat` of the successor `min{y in V^ : y > v}`.
    pub succ: Vec<usize>,
    /// Hermite normal form basis of L = <V^ - V^>.
    pub lattice: Vec<FieldElement>,
    lattice_rows: Vec<Vec<BigInt>>,
    /// Rank of L equals d - 1.
    pub qm: bool,
}

impl ParryData {
    pub fn successor(&self, i: usize) -> &FieldElement {
        &self.v_hat[self.succ[i]]
    }
    pub fn lattice_rank(&self) -> usize {
        self.lattice.len()
    }
    /// Index `i` with `x` in `[v_i, v^_i)`, for `x` in `[0,1)`.
    pub fn interval_index(&self, x: &FieldElement) -> Result<usize> {
        if !x.in_unit_interval()? {
            return Err(Error::OutOfDomain);
        }
        for i in (0..self.v.len()).rev() {
            if self.v[i].le(x)? {
                return Ok(i);
            }
        }
        Err(Error::OutOfDomain)
    }
    pub fn lattice_contains(&self, x: &FieldElement) -> bool {
        x.is_integral() && lattice::contains(&self.lattice_rows, x.num())
    }
}

/// Compute the orbit of 1, V, V^, the successor map and L.
pub fn parry_data(field: &BetaField) -> Result<ParryData> {
    let mut seen: HashMap<FieldElement, usize> = HashMap::new();
    let mut digits: Vec<u32> = Vec::new();
    let mut rs: Vec<FieldElement> = Vec::new();
    let mut cur = field.one();
    let (greedy, finite) = loop {
        if digits.len() >= PARRY_CYCLE_CAP {
            return Err(Error::CycleNotFound(PARRY_CYCLE_CAP));
        }
        let (a, r) = t_raw(&cur)?;
        digits.push(a.to_u32().ok_or(Error::Overflow)?);
        if r.is_zero() {
            break (Expansion { preperiod: digits.clone(), period: Vec::new() }, true);
        }
        if let Some(&j) = seen.get(&r) {
            // r_{j+1} == r_{k}: digits after position j+1 repeat
            let k = digits.len();
            let pre = digits[..=j].to_vec();
            let per = digits[j + 1..k].to_vec();
            break (Expansion { preperiod: pre, period: per }, false);
        }
        seen.insert(r.clone(), digits.len() - 1);
        rs.push(r.clone());
        cur = r;
    };
    let quasi = if finite {
        let mut p = greedy.preperiod.clone();
        let last = p.len() - 1;
        p[last] -= 1;
        Expansion { preperiod: Vec::new(), period: p }
    } else {
        greedy.clone()
    };
    let mut v_hat: Vec<FieldElement> = vec![field.one()];
    for r in &rs {
        if !v_hat.contains(r) {
            v_hat.push(r.clone());
        }
    }
    sort_elements(&mut v_hat)?;
    let mut v: Vec<FieldElement> = vec![field.zero()];
    for x in &v_hat {
        if !x.is_zero() && *x != field.one() && !v.contains(x) {
            v.push(x.clone());
        }
    }
    sort_elements(&mut v)?;
    let mut succ = Vec::with_capacity(v.len());
    for x in &v {
        let mut found = None;
        for (j, y) in v_hat.iter().enumerate() {
            if x.lt(y)? {
                found = Some(j);
                break;
            }
        }
        succ.push(found.ok_or(Error::OutOfDomain)?);
    }
    let base = &v_hat[0];
    let gens: Vec<Vec<BigInt>> = v_hat[1..].iter().map(|y| (y - base).num().to_vec()).collect();
    let rows = lattice::hnf(&gens);
    let lattice_elems: Vec<FieldElement> = rows
        .iter()
        .map(|r| FieldElement::new(field.clone(), r.clone(), BigInt::one()))
        .collect();
    let qm = rows.len() + 1 == field.degree();
    Ok(ParryData {
        field: field.clone(),
        expansion_of_one: greedy,
        quasi_greedy: quasi,
        v_hat,
        v,
        succ,
        lattice: lattice_elems,
        lattice_rows: rows,
        qm,
    })
}

pub fn sort_elements(xs: &mut [FieldElement]) -> Result<()> {
    let mut err = None;
    xs.sort_by(|a, b| match a.cmp_exact(b) {
        Ok(o) => o,
        Err(e) => {
            err = Some(e);
            Ordering::Equal
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// `T^{-1}(x)`: the points `(a + x)/beta` in `[0,1)`, ascending. With `restrict_integral`
/// only those in Z[beta] are kept.
pub fn t_preimages(x: &FieldElement, restrict_integral: bool) -> Result<Vec<FieldElement>> {
    if !x.in_unit_interval()? {
        return Err(Error::OutOfDomain);
    }
    let f = x.field();
    let beta = f.beta();
    let mut out = Vec::new();
    for a in f.alphabet() {
        let s = x.add_int(a);
        if s.lt(&beta)? {
            let y = s.div_beta();
            if !restrict_integral || y.is_integral() {
                out.push(y);
            }
        }
    }
    Ok(out)
}

/// The left-limit step `x -> (c, T(x-))` with `c = ceil(beta x) - 1`.
fn left_step(x: &FieldElement) -> Result<(i64, FieldElement)> {
    let y = x.mul_beta();
    let c = if let Some(q) = y.as_rational().filter(|q| q.is_integer()) {
        q.to_integer() - BigInt::one()
    } else {
        y.floor()?
    };
    let c = c.to_i64().ok_or(Error::Overflow)?;
    Ok((c, y.add_int(-c)))
}

/// The substitution on V^ whose fixed point encodes the gaps of the beta-integers:
/// `x -> 1^c T(x-)` with `c = ceil(beta x) - 1`. Letters are indices into `v_hat`.
pub fn gap_substitution(parry: &ParryData) -> Result<Vec<Vec<usize>>> {
    let one_idx = parry.v_hat.len() - 1;
    let mut rules = Vec::with_capacity(parry.v_hat.len());
    for x in &parry.v_hat {
        let (c, t) = left_step(x)?;
        let mut img = vec![one_idx; c.max(0) as usize];
        let idx = parry.v_hat.iter().position(|y| *y == t).ok_or(Error::OutOfDomain)?;
        img.push(idx);
        rules.push(img);
    }
    Ok(rules)
}

/// The first `n` non-negative beta-integers in increasing order.
pub fn beta_integers(parry: &ParryData, n: usize) -> Result<Vec<FieldElement>> {
    let field = &parry.field;
    if n == 0 {
        return Ok(Vec::new());
    }
    let rules = gap_substitution(parry)?;
    let one_idx = parry.v_hat.len() - 1;
    let mut word = vec![one_idx];
    while word.len() < n {
        let next: Vec<usize> = word.iter().flat_map(|&l| rules[l].iter().copied()).collect();
        if next.len() <= word.len() {
            return Err(Error::IterationCapExceeded(word.len()));
        }
        word = next;
    }
    let mut out = Vec::with_capacity(n);
    let mut acc = field.zero();
    out.push(acc.clone());
    for &l in word.iter().take(n - 1) {
        acc = &acc + &parry.v_hat[l];
        out.push(acc.clone());
    }
    Ok(out)
}

/// Smallest `k` with `beta^-k z < 1`, and whether `T^k(beta^-k z) = 0`.
pub fn is_beta_integer(z: &FieldElement) -> Result<bool> {
    if z.sign()? == Ordering::Less {
        return Ok(false);
    }
    let f = z.field();
    let one = f.one();
    let mut y = z.clone();
    let mut k = 0;
    while !y.lt(&one)? {
        y = y.div_beta();
        k += 1;
    }
    for _ in 0..k {
        y = t_raw(&y)?.1;
    }
    Ok(y.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::make_beta;

    fn f(s: &str) -> BetaField {
        make_beta(s, 128).unwrap()
    }

    #[test]
    fn steps_and_expansions() {
        let k = f("1,-3,-2");
        let half = k.from_ratio(1, 2);
        let t = t_step(&half).unwrap();
        assert_eq!(t, k.parse_element("b/2 - 1").unwrap());
        let v = &k.beta() - &k.from_int(3);
        assert!(t_step(&v).unwrap().is_zero());
        assert_eq!(greedy_expansion(&v, 2).unwrap(), vec![2, 0]);
        assert!(matches!(t_step(&k.one()), Err(Error::OutOfDomain)));
    }

    #[test]
    fn parry_for_two_two() {
        let k = f("1,-2,-2");
        let p = parry_data(&k).unwrap();
        assert_eq!(p.expansion_of_one.preperiod, vec![2, 2]);
        assert_eq!(p.quasi_greedy.period, vec![2, 1]);
        let bm2 = &k.beta() - &k.from_int(2);
        assert_eq!(p.v, vec![k.zero(), bm2.clone()]);
        assert_eq!(p.v_hat, vec![bm2, k.one()]);
        assert_eq!(p.lattice, vec![&k.beta() - &k.from_int(3)]);
        assert!(p.qm);
    }

    #[test]
    fn preimages() {
        let k = f("1,-3,-2");
        let pre = t_preimages(&k.zero(), false).unwrap();
        assert_eq!(pre.len(), 4);
        let pi = t_preimages(&k.zero(), true).unwrap();
        assert_eq!(pi, vec![k.zero(), &k.beta() - &k.from_int(3)]);
        let p9 = t_preimages(&k.from_ratio(9, 10), false).unwrap();
        assert_eq!(p9.len(), 3);
    }

    #[test]
    fn beta_integers_quadratic() {
        let k = f("1,-3,-2");
        let p = parry_data(&k).unwrap();
        let ints = beta_integers(&p, 5).unwrap();
        let b = k.beta();
        assert_eq!(ints, vec![k.zero(), k.one(), k.from_int(2), k.from_int(3), b]);
    }
}
