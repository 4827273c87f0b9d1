//! Finite approximations of Rauzy fractals and integral beta-tiles.
//!
//! The level-k cloud of `x` is `beta^k T^{-k}(x)`. Each of its points is `x + w` with `w` a
//! polynomial in beta with digit coefficients, so points are stored as integral offsets
//! `w` (i64 coefficients) next to the shared base point.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;
use serde::Serialize;

use crate::dynamics::ParryData;
use crate::error::{Error, Result};
use crate::field::{finite_address_i64, BetaField, FieldElement, ShiftComparator};
use crate::rat;

/// Deepest level a cloud may be built at.
pub const LEVEL_CAP: usize = 14;
/// Largest number of points a single cloud may hold.
pub const POINT_CAP: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CloudKind {
    /// `beta^k T^{-k}(x)`, approximating the Rauzy fractal R(x).
    Rauzy,
    /// `beta^k (T^{-k}(x) ∩ Z[beta])`, approximating the integral tile.
    Integral,
}

/// A finite point set approximating one tile.
#[derive(Clone, Debug)]
pub struct TileCloud {
    pub field: BetaField,
    pub base: FieldElement,
    pub level: usize,
    pub kind: CloudKind,
    /// Integral translation applied after generation (zero for plain clouds).
    pub shift: Vec<i64>,
    /// Point i is `base + shift + offsets[i]`.
    pub offsets: Vec<Vec<i64>>,
    /// Archimedean coordinates of each point.
    pub arch: Vec<Vec<f64>>,
    /// Finite-place digits of each point, when the points are integral and beta is not a unit.
    pub addresses: Option<Vec<Vec<u32>>>,
    pub addr_depth: usize,
}

impl TileCloud {
    pub fn len(&self) -> usize {
        self.offsets.len()
    }
    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
    /// Exact value of point `i`.
    pub fn point(&self, i: usize) -> FieldElement {
        let mut w = self.offsets[i].clone();
        for (a, b) in w.iter_mut().zip(&self.shift) {
            *a += b;
        }
        &self.base + &self.field.from_zvec(&w)
    }
    pub fn points(&self) -> Vec<FieldElement> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
    /// Offsets `point - base` as a set.
    pub fn offset_set(&self) -> BTreeSet<Vec<i64>> {
        self.offsets
            .iter()
            .map(|w| w.iter().zip(&self.shift).map(|(a, b)| a + b).collect())
            .collect()
    }
    /// Translate every point by an integral element.
    pub fn translate(&self, t: &FieldElement) -> Result<TileCloud> {
        let tv = t.to_i64_vec().ok_or(Error::NotIntegral)?;
        let mut out = self.clone();
        for (a, b) in out.shift.iter_mut().zip(&tv) {
            *a = a.checked_add(*b).ok_or(Error::Overflow)?;
        }
        let tc = self.field.arch_from_conj(&self.field.conj_i64(&tv));
        for p in out.arch.iter_mut() {
            for (a, b) in p.iter_mut().zip(&tc) {
                *a += b;
            }
        }
        if out.addresses.is_some() {
            out.addresses = Some(self.compute_addresses(&out.shift)?);
        }
        Ok(out)
    }

    fn compute_addresses(&self, shift: &[i64]) -> Result<Vec<Vec<u32>>> {
        let bv = self.base.to_i64_vec().ok_or(Error::NotIntegral)?;
        self.offsets
            .iter()
            .map(|w| {
                let z: Vec<i64> = w.iter().zip(&bv).zip(shift).map(|((a, b), c)| a + b + c).collect();
                finite_address_i64(&self.field, &z, self.addr_depth)
            })
            .collect()
    }

    /// Recompute addresses at a different depth (integral points only).
    pub fn with_addr_depth(&self, depth: usize) -> Result<TileCloud> {
        let mut out = self.clone();
        out.addr_depth = depth;
        if self.base.is_integral() && !self.field.is_unit() {
            out.addresses = Some(out.compute_addresses(&self.shift)?);
        }
        Ok(out)
    }

    /// Axis-aligned bounding box of the archimedean coordinates: (min, max) per axis.
    pub fn bbox(&self) -> Vec<(f64, f64)> {
        let dim = self.field.arch_dim();
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        for p in &self.arch {
            for (k, &c) in p.iter().enumerate() {
                b[k].0 = b[k].0.min(c);
                b[k].1 = b[k].1.max(c);
            }
        }
        b
    }
}

fn check_level(field: &BetaField, k: usize) -> Result<()> {
    if k > LEVEL_CAP {
        return Err(Error::BadParameters(format!("level {k} exceeds the cap {LEVEL_CAP}")));
    }
    let est = field.beta_f64().powi(k as i32);
    if est > POINT_CAP as f64 {
        return Err(Error::BadParameters(format!("a level-{k} cloud would hold about {est:.0} points")));
    }
    Ok(())
}

fn add_scaled(w: &[i64], a: i64, p: &[i64]) -> Result<Vec<i64>> {
    w.iter()
        .zip(p)
        .map(|(x, y)| {
            a.checked_mul(*y).and_then(|t| x.checked_add(t)).ok_or(Error::Overflow)
        })
        .collect()
}

fn sub_vec(a: &[i64], b: &[i64]) -> Result<Vec<i64>> {
    a.iter().zip(b).map(|(x, y)| x.checked_sub(*y).ok_or(Error::Overflow)).collect()
}

/// Integral offsets of `beta^k T^{-k}(x)` for `x` in `[0,1)`.
pub(crate) fn rauzy_offsets(x: &FieldElement, k: usize) -> Result<Vec<Vec<i64>>> {
    let f = x.field();
    let d = f.degree();
    let m = f.max_digit();
    let cmp = ShiftComparator::new(x);
    let mut nodes: Vec<Vec<i64>> = vec![vec![0; d]];
    let mut pj = f.beta_pow_i64(0)?;
    for _ in 0..k {
        let pnext = f.mul_beta_i64(&pj)?;
        // g = beta^{j+1} - m beta^j
        let g = add_scaled(&pnext, -m, &pj)?;
        let mut next = Vec::with_capacity(nodes.len() * (m as usize + 1));
        for w in &nodes {
            for a in 0..m {
                next.push(add_scaled(w, a, &pj)?);
            }
            if cmp.sign(&sub_vec(&g, w)?)? == Ordering::Greater {
                next.push(add_scaled(w, m, &pj)?);
            }
        }
        nodes = next;
        pj = pnext;
    }
    Ok(nodes)
}

/// Children of a level-j offset `w` (z = x + w) at level j+1.
pub(crate) fn rauzy_children(
    f: &BetaField,
    cmp: &ShiftComparator,
    w: &[i64],
    pj: &[i64],
    g: &[i64],
) -> Result<Vec<(i64, Vec<i64>)>> {
    let m = f.max_digit();
    let mut out = Vec::with_capacity(m as usize + 1);
    for a in 0..m {
        out.push((a, add_scaled(w, a, pj)?));
    }
    if cmp.sign(&sub_vec(g, w)?)? == Ordering::Greater {
        out.push((m, add_scaled(w, m, pj)?));
    }
    Ok(out)
}

/// Offsets of `beta^k (T^{-k}(x) ∩ Z[beta])` for integral `x` in `[0,1)`.
pub(crate) fn integral_offsets(x: &FieldElement, k: usize) -> Result<Vec<Vec<i64>>> {
    let f = x.field();
    let d = f.degree();
    let m = f.max_digit();
    let n = f.abs_norm() as i64;
    let beta = f.beta_pow_i64(1)?;
    let xv = x.to_i64_vec().ok_or(Error::NotIntegral)?;
    let mut nodes: Vec<(Vec<i64>, Vec<i64>)> = vec![(xv, vec![0; d])];
    let mut pj = f.beta_pow_i64(0)?;
    for _ in 0..k {
        let mut next = Vec::with_capacity(nodes.len() * 2);
        for (y, w) in &nodes {
            for a in 0..=m {
                if (a + y[0]).rem_euclid(n) != 0 {
                    continue;
                }
                if a == m {
                    // need a + y < beta
                    let mut t = beta.clone();
                    t[0] -= a;
                    let t = sub_vec(&t, y)?;
                    if f.sign_i64(&t)? != Ordering::Greater {
                        continue;
                    }
                }
                let mut ya = y.clone();
                ya[0] += a;
                let y1 = f.div_beta_i64(&ya)?;
                next.push((y1, add_scaled(w, a, &pj)?));
            }
        }
        nodes = next;
        pj = f.mul_beta_i64(&pj)?;
    }
    Ok(nodes.into_iter().map(|(_, w)| w).collect())
}

fn build_cloud(x: &FieldElement, k: usize, kind: CloudKind, offsets: Vec<Vec<i64>>) -> Result<TileCloud> {
    let f = x.field().clone();
    let xc = x.conjugates();
    let arch: Vec<Vec<f64>> = offsets
        .iter()
        .map(|w| {
            let c: Vec<_> = f.conj_i64(w).iter().zip(&xc).map(|(a, b)| a + b).collect();
            f.arch_from_conj(&c)
        })
        .collect();
    let d = f.degree();
    let mut cloud = TileCloud {
        field: f.clone(),
        base: x.clone(),
        level: k,
        kind,
        shift: vec![0; d],
        offsets,
        arch,
        addresses: None,
        addr_depth: k,
    };
    if x.is_integral() && !f.is_unit() {
        cloud.addresses = Some(cloud.compute_addresses(&vec![0; d])?);
    }
    Ok(cloud)
}

/// `beta^k T^{-k}(x)` for `x` in `[0,1) ∩ Z[1/beta]`.
pub fn rauzy_cloud(x: &FieldElement, k: usize) -> Result<TileCloud> {
    if !x.in_unit_interval()? {
        return Err(Error::NotInHalfOpenUnit);
    }
    if !x.in_z_beta_inv() {
        return Err(Error::NotBetaRational);
    }
    check_level(x.field(), k)?;
    let offs = rauzy_offsets(x, k)?;
    build_cloud(x, k, CloudKind::Rauzy, offs)
}

/// `beta^k (T^{-k}(x) ∩ Z[beta])` for `x` in `[0,1) ∩ Z[beta]`.
pub fn integral_cloud(x: &FieldElement, k: usize) -> Result<TileCloud> {
    if !x.is_integral() {
        return Err(Error::NotIntegral);
    }
    if !x.in_unit_interval()? {
        return Err(Error::NotInHalfOpenUnit);
    }
    check_level(x.field(), k)?;
    let offs = integral_offsets(x, k)?;
    build_cloud(x, k, CloudKind::Integral, offs)
}

/// Checks `beta^k T^{-k}(x) - x = beta^k T^{-k}(v) - v` for `x` in `[v, v^)`.
pub fn translation_identity_check(
    parry: &ParryData,
    x: &FieldElement,
    v_index: usize,
    k: usize,
) -> Result<bool> {
    let v = parry.v.get(v_index).ok_or(Error::WrongInterval)?;
    if !(v.le(x)? && x.lt(parry.successor(v_index))?) {
        return Err(Error::WrongInterval);
    }
    let cx = rauzy_cloud(x, k)?;
    let cv = rauzy_cloud(v, k)?;
    Ok(cx.offset_set() == cv.offset_set())
}

/// Measured one-sided Hausdorff distance from level k+1 to level k, and its a-priori bound
/// `(ceil(beta)-1) max_sigma |beta^sigma|^k`.
#[derive(Clone, Debug, Serialize)]
pub struct HausdorffReport {
    pub level: usize,
    pub measured: f64,
    #[serde(serialize_with = "crate::report::ser_rat")]
    pub bound: BigRational,
    pub bound_f64: f64,
    pub within_bound: bool,
}

/// Distance between points in the archimedean space: max over places, Euclidean inside a
/// complex place.
pub fn arch_distance(f: &BetaField, a: &[f64], b: &[f64]) -> f64 {
    let mut i = 0;
    let mut best = 0.0_f64;
    for pl in f.places() {
        if pl.complex {
            let dx = a[i] - b[i];
            let dy = a[i + 1] - b[i + 1];
            best = best.max((dx * dx + dy * dy).sqrt());
            i += 2;
        } else {
            best = best.max((a[i] - b[i]).abs());
            i += 1;
        }
    }
    best
}

pub fn hausdorff_bound(f: &BetaField, k: usize) -> BigRational {
    let mut b = BigRational::from_integer(f.max_digit().into());
    let s = f.max_conj_abs_upper();
    for _ in 0..k {
        b *= &s;
    }
    b
}

/// Compare consecutive-level clouds of the same base point.
pub fn hausdorff_defect(coarse: &TileCloud, fine: &TileCloud) -> Result<HausdorffReport> {
    if fine.level != coarse.level + 1 || fine.base != coarse.base || fine.kind != coarse.kind {
        return Err(Error::LevelMismatch);
    }
    let f = &coarse.field;
    let bound = hausdorff_bound(f, coarse.level);
    let bound_f = rat::to_f64_up(&bound);
    let cell = bound_f.max(1e-12) * 1.5;
    let dim = f.arch_dim();
    let key = |p: &[f64]| -> Vec<i64> { p.iter().map(|c| (c / cell).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in coarse.arch.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    let mut measured = 0.0_f64;
    let neighbours: Vec<Vec<i64>> = {
        let mut v = vec![vec![]];
        for _ in 0..dim {
            let mut nv = Vec::new();
            for base in &v {
                for dlt in -1..=1 {
                    let mut b = base.clone();
                    b.push(dlt);
                    nv.push(b);
                }
            }
            v = nv;
        }
        v
    };
    for p in &fine.arch {
        let kp = key(p);
        let mut best = f64::INFINITY;
        for nb in &neighbours {
            let kk: Vec<i64> = kp.iter().zip(nb).map(|(a, b)| a + b).collect();
            if let Some(list) = grid.get(&kk) {
                for &j in list {
                    best = best.min(arch_distance(f, p, &coarse.arch[j]));
                }
            }
        }
        if !best.is_finite() {
            // nothing in the neighbouring cells: brute force
            for q in &coarse.arch {
                best = best.min(arch_distance(f, p, q));
            }
        }
        measured = measured.max(best);
    }
    Ok(HausdorffReport {
        level: coarse.level,
        measured,
        within_bound: measured <= bound_f * (1.0 + 1e-9),
        bound,
        bound_f64: bound_f,
    })
}

/// Sum of the contraction tail: a radius around a level-k point containing all points of
/// the tile that descend from it.
pub fn tail_radius(f: &BetaField, k: usize) -> f64 {
    let s = f.max_conj_abs_f64() * (1.0 + 1e-12);
    f.max_digit() as f64 * s.powi(k as i32) / (1.0 - s)
}

/// Result of `periodic_patch`.
#[derive(Clone, Debug)]
pub struct PeriodicPatch {
    pub clouds: Vec<TileCloud>,
    pub translates: Vec<FieldElement>,
    /// Set when the patch was built although (QM) fails.
    pub warning: Option<String>,
}

/// Translates `R(0) + t` for `t` in L.
pub fn periodic_patch(
    parry: &ParryData,
    translates: &[FieldElement],
    k: usize,
    allow_non_qm: bool,
) -> Result<PeriodicPatch> {
    let warning = if !parry.qm {
        if !allow_non_qm {
            return Err(Error::QmViolated);
        }
        Some("rank L < d-1: the translates do not form a periodic tiling".to_string())
    } else {
        None
    };
    for t in translates {
        if !parry.lattice_contains(t) {
            return Err(Error::NotInLattice);
        }
    }
    let base = rauzy_cloud(&parry.field.zero(), k)?;
    let clouds = translates.iter().map(|t| base.translate(t)).collect::<Result<Vec<_>>>()?;
    Ok(PeriodicPatch { clouds, translates: translates.to_vec(), warning })
}

/// Small integer combinations of the L basis, ordered by coefficient size.
pub fn lattice_translates(parry: &ParryData, radius: i64) -> Vec<FieldElement> {
    let basis = &parry.lattice;
    let f = &parry.field;
    let mut out = vec![f.zero()];
    let mut combos: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..basis.len() {
        let mut n = Vec::new();
        for c in &combos {
            for a in -radius..=radius {
                let mut c2 = c.clone();
                c2.push(a);
                n.push(c2);
            }
        }
        combos = n;
    }
    combos.sort_by_key(|c| (c.iter().map(|a| a.abs()).sum::<i64>(), c.clone()));
    for c in combos {
        if c.iter().all(|&a| a == 0) {
            continue;
        }
        let mut t = f.zero();
        for (a, b) in c.iter().zip(basis) {
            t = &t + &b.mul_i64(*a);
        }
        out.push(t);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::parry_data;
    use crate::field::make_beta;

    #[test]
    fn quadratic_cloud_sizes() {
        let f = make_beta("1,-3,-2", 128).unwrap();
        let c1 = rauzy_cloud(&f.zero(), 1).unwrap();
        let pts: BTreeSet<_> = c1.points().into_iter().map(|p| p.coeff_strings()).collect();
        assert_eq!(pts.len(), 4);
        assert_eq!(rauzy_cloud(&f.zero(), 2).unwrap().len(), 14);
        let i1 = integral_cloud(&f.zero(), 1).unwrap();
        let mut vals: Vec<String> = i1.points().iter().map(|p| p.pretty()).collect();
        vals.sort();
        assert_eq!(vals, vec!["0", "2"]);
        // 0, beta - 3 and 4 - beta: the digit 3 above beta - 3 would leave [0,1)
        let i2 = integral_cloud(&f.zero(), 2).unwrap();
        assert_eq!(i2.len(), 3);
        let brute: BTreeSet<_> = rauzy_cloud(&f.zero(), 2)
            .unwrap()
            .points()
            .into_iter()
            .filter(|p| p.mul(&f.beta_pow(-2)).is_integral())
            .map(|p| p.coeff_strings())
            .collect();
        let got: BTreeSet<_> = i2.points().into_iter().map(|p| p.coeff_strings()).collect();
        assert_eq!(brute, got);
    }

    #[test]
    fn cloud_errors() {
        let f = make_beta("1,-3,-2", 128).unwrap();
        assert!(matches!(rauzy_cloud(&f.one(), 1), Err(Error::NotInHalfOpenUnit)));
        assert!(matches!(rauzy_cloud(&f.from_ratio(1, 3), 1), Err(Error::NotBetaRational)));
        assert!(matches!(integral_cloud(&f.from_ratio(1, 2), 1), Err(Error::NotIntegral)));
    }

    #[test]
    fn translation_identity_holds() {
        let f = make_beta("1,-3,-2", 128).unwrap();
        let p = parry_data(&f).unwrap();
        let x = f.beta_pow(-2);
        assert!(translation_identity_check(&p, &x, 0, 4).unwrap());
        assert!(matches!(translation_identity_check(&p, &x, 1, 2), Err(Error::WrongInterval)));
    }

    #[test]
    fn hausdorff_golden() {
        let f = make_beta("1,-1,-1", 128).unwrap();
        let c0 = rauzy_cloud(&f.zero(), 0).unwrap();
        let c1 = rauzy_cloud(&f.zero(), 1).unwrap();
        let r = hausdorff_defect(&c0, &c1).unwrap();
        assert!((r.bound_f64 - 1.0).abs() < 1e-12);
        assert!(r.within_bound);
        let c5 = rauzy_cloud(&f.zero(), 5).unwrap();
        let c6 = rauzy_cloud(&f.zero(), 6).unwrap();
        let r = hausdorff_defect(&c5, &c6).unwrap();
        assert!(r.within_bound && r.bound_f64 < 0.1);
        assert!(matches!(hausdorff_defect(&c0, &c5), Err(Error::LevelMismatch)));
    }

    #[test]
    fn periodic_patch_requires_qm() {
        let f = make_beta("1,0,-1,-1", 128).unwrap();
        let p = parry_data(&f).unwrap();
        assert!(!p.qm);
        assert!(matches!(periodic_patch(&p, &[f.zero()], 2, false), Err(Error::QmViolated)));
        let ok = periodic_patch(&p, &[f.zero()], 2, true).unwrap();
        assert!(ok.warning.is_some());
    }
}
