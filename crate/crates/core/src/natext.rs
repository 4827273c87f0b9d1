//! The natural extension domain X = ∪_v [v, v^) × (δ'(v) - R(v)) and the map on diagonal points.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{t_step, ParryData};
use crate::error::{Error, Result};
use crate::field::{finite_address_i64, BetaField, FieldElement};
use crate::lattice;
use crate::periodicity::is_purely_periodic;
use crate::report::ser_elem;
use crate::tiles::{rauzy_cloud, rauzy_offsets, tail_radius};

/// A point of the suspension. Only diagonal points `δ(x)` are represented exactly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NatExtPoint {
    #[serde(serialize_with = "ser_elem")]
    pub x: FieldElement,
    pub as_diagonal: bool,
}

impl NatExtPoint {
    pub fn diagonal(x: FieldElement) -> Self {
        NatExtPoint { x, as_diagonal: true }
    }
}

/// `δ(x) ↦ δ(T x)`.
pub fn nat_ext_step(p: &NatExtPoint) -> Result<NatExtPoint> {
    if !p.as_diagonal || !p.x.in_unit_interval()? {
        return Err(Error::OutOfDomain);
    }
    Ok(NatExtPoint::diagonal(t_step(&p.x)?))
}

/// Whether `δ(x)` lies in X. For `x` in Q(β) this is pure periodicity of `x`.
/// Points outside `[0,1)` and orbits exceeding the cycle cap count as outside.
pub fn nat_ext_contains(x: &FieldElement) -> bool {
    matches!(x.in_unit_interval(), Ok(true))
        && is_purely_periodic(x).map(|r| r.purely_periodic).unwrap_or(false)
}

/// One vertical slice `[v, v^) × (δ'(v) - R(v))` of X at level k.
#[derive(Clone, Debug, Serialize)]
pub struct DomainSlice {
    pub index: usize,
    #[serde(serialize_with = "ser_elem")]
    pub v: FieldElement,
    #[serde(serialize_with = "ser_elem")]
    pub v_hat: FieldElement,
    pub interval: (f64, f64),
    /// Archimedean coordinates of `δ'(v) - p` for the level-k points p of R(v).
    pub points: Vec<Vec<f64>>,
    /// Finite-place digits of `-w` for each point, empty for unit β.
    pub addresses: Vec<Vec<u32>>,
}

pub fn domain_slices(parry: &ParryData, k: usize) -> Result<Vec<DomainSlice>> {
    let f = &parry.field;
    let mut out = Vec::with_capacity(parry.v.len());
    for (i, v) in parry.v.iter().enumerate() {
        let cloud = rauzy_cloud(v, k)?;
        let mut points = Vec::with_capacity(cloud.len());
        let mut addresses = Vec::new();
        for w in &cloud.offsets {
            let neg: Vec<i64> = w.iter().map(|c| -c).collect();
            let c = f.conj_i64(&neg);
            points.push(f.arch_from_conj(&c));
            if !f.is_unit() {
                addresses.push(finite_address_i64(f, &neg, k)?);
            }
        }
        let vh = parry.successor(i).clone();
        out.push(DomainSlice {
            index: i,
            interval: (v.to_f64(), vh.to_f64()),
            v: v.clone(),
            v_hat: vh,
            points,
            addresses,
        });
    }
    Ok(out)
}

/// Samples hit by several outer boxes are refined until the tail radius falls below this
/// fraction of the level-0 radius.
pub const REFINE_TOL: f64 = 1e-3;
const REFINE_BUDGET: usize = 50_000;
const SCAN_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct CoveringReport {
    pub level: usize,
    pub samples: usize,
    pub seed: u64,
    pub window: (f64, f64),
    pub in_stripe: usize,
    pub out_of_stripe: usize,
    /// Hit counts against level-k outer boxes.
    pub raw_histogram: BTreeMap<usize, usize>,
    /// Hit counts after descending to level `refine_depth` on multiply hit samples.
    pub refined_histogram: BTreeMap<usize, usize>,
    pub refine_depth: usize,
    /// Most frequent refined hit count (the degree estimate).
    pub modal_count: usize,
    /// Share of in-stripe samples with refined count 1.
    pub fraction_one: f64,
    pub raw_fraction_one: f64,
}

struct Sample {
    arch: Vec<Complex64>,
    /// `Σ d_j β^j` for the sampled digits.
    u: Vec<i64>,
    in_stripe: bool,
}

/// Level-k cloud of one v, bucketed by the address of the offset.
struct SliceIndex {
    cmp: crate::field::ShiftComparator,
    buckets: HashMap<Vec<u32>, Vec<(Vec<i64>, Vec<Complex64>)>>,
}

/// Deepest level reached by the refinement: tail radius below `REFINE_TOL` of the level-0
/// radius, but with `beta^j` still comfortably inside i64.
fn refine_depth(f: &BetaField, k: usize) -> usize {
    let s = f.max_conj_abs_f64();
    let want = (REFINE_TOL.ln() / s.ln()).ceil() as usize;
    let safe = (56.0 / f.beta_f64().log2()).floor() as usize;
    want.min(safe).max(k)
}

struct Ctx<'a> {
    parry: &'a ParryData,
    f: &'a BetaField,
    k: usize,
    depth: usize,
    r: f64,
    disc: Vec<f64>,
    slices: Vec<SliceIndex>,
    conj_beta: Vec<Complex64>,
}

fn pad(r: f64) -> f64 {
    r * (1.0 + 1e-9) + 1e-12
}

fn place_dist(f: &BetaField, a: &[Complex64], b: &[Complex64]) -> f64 {
    f.places()
        .iter()
        .zip(a.iter().zip(b))
        .map(|(pl, (x, y))| if pl.complex { (x - y).norm() } else { (x.re - y.re).abs() })
        .fold(0.0, f64::max)
}

/// Monte-Carlo estimate of the covering degree of the collection {R(x) : x in Z[1/β] ∩ [0,1)}.
///
/// Samples are drawn uniformly from the bounding box of R(0) times an address window; the
/// address axis encodes digits `d_j` as `Σ d_j |N|^{-j-1}` and samples outside `[0,1)` are
/// out of stripe. For unit β the window is ignored.
pub fn covering_degree_estimate(
    parry: &ParryData,
    k: usize,
    samples: usize,
    window: (f64, f64),
    seed: u64,
) -> Result<CoveringReport> {
    let f = &parry.field;
    if !(window.0 < window.1) {
        return Err(Error::BadParameters("empty window".into()));
    }
    let depth = refine_depth(f, k);
    let mut slices = Vec::new();
    let mut disc = vec![0.0_f64; f.places().len()];
    for v in &parry.v {
        let offs = rauzy_offsets(v, k)?;
        let mut buckets: HashMap<_, Vec<_>> = HashMap::new();
        for w in offs {
            let c = f.conj_i64(&w);
            for (d, z) in disc.iter_mut().zip(&c) {
                *d = d.max(z.norm());
            }
            buckets.entry(finite_address_i64(f, &w, k)?).or_default().push((w, c));
        }
        slices.push(SliceIndex { cmp: crate::field::ShiftComparator::new(v), buckets });
    }
    let r = pad(tail_radius(f, k));
    let ctx = Ctx {
        parry,
        f,
        k,
        depth,
        r,
        disc: disc.iter().map(|d| d + r + 1e-9).collect(),
        slices,
        conj_beta: f.places().iter().map(|p| p.approx).collect(),
    };

    let zero_cloud = rauzy_cloud(&f.zero(), k)?;
    let bbox = zero_cloud.bbox();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = f.abs_norm();
    let float_digits = if base > 1 { (40.0 / (base as f64).log2()).floor() as usize } else { 0 };
    let powers: Vec<Vec<i64>> = (0..depth).map(|j| f.beta_pow_i64(j)).collect::<Result<_>>()?;
    let mut pts = Vec::with_capacity(samples);
    for _ in 0..samples {
        let coords: Vec<f64> = bbox.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect();
        let mut arch = Vec::new();
        let mut c = 0;
        for pl in f.places() {
            if pl.complex {
                arch.push(Complex64::new(coords[c], coords[c + 1]));
                c += 2;
            } else {
                arch.push(Complex64::new(coords[c], 0.0));
                c += 1;
            }
        }
        let mut u = vec![0i64; f.degree()];
        let mut in_stripe = true;
        if base > 1 {
            let mut t: f64 = rng.gen_range(window.0..window.1);
            in_stripe = (0.0..1.0).contains(&t);
            for (j, pw) in powers.iter().enumerate() {
                let dgt = if j < float_digits {
                    t *= base as f64;
                    let d = t.floor().clamp(0.0, (base - 1) as f64);
                    t -= d;
                    d as i64
                } else {
                    rng.gen_range(0..base as i64)
                };
                for (a, b) in u.iter_mut().zip(pw) {
                    *a += dgt * b;
                }
            }
        }
        pts.push(Sample { arch, u, in_stripe });
    }

    let counts: Vec<Option<(usize, usize)>> = pts
        .par_iter()
        .map(|s| if s.in_stripe { count_hits(&ctx, s).map(Some) } else { Ok(None) })
        .collect::<Result<_>>()?;

    let mut raw = BTreeMap::new();
    let mut refined = BTreeMap::new();
    let mut in_stripe = 0;
    for (raw_c, ref_c) in counts.iter().flatten() {
        in_stripe += 1;
        *raw.entry(*raw_c).or_insert(0) += 1;
        *refined.entry(*ref_c).or_insert(0) += 1;
    }
    let modal_count = refined.iter().max_by_key(|(c, n)| (**n, std::cmp::Reverse(**c))).map(|(c, _)| *c).unwrap_or(0);
    let frac = |h: &BTreeMap<usize, usize>| {
        if in_stripe == 0 {
            0.0
        } else {
            *h.get(&1).unwrap_or(&0) as f64 / in_stripe as f64
        }
    };
    Ok(CoveringReport {
        level: k,
        samples,
        seed,
        window,
        in_stripe,
        out_of_stripe: samples - in_stripe,
        fraction_one: frac(&refined),
        raw_fraction_one: frac(&raw),
        raw_histogram: raw,
        refined_histogram: refined,
        refine_depth: depth,
        modal_count,
    })
}

/// (raw, refined) number of tiles whose outer cover contains the sample.
fn count_hits(ctx: &Ctx, s: &Sample) -> Result<(usize, usize)> {
    let f = ctx.f;
    let discs: Vec<(Complex64, f64)> = s.arch.iter().copied().zip(ctx.disc.iter().copied()).collect();
    let cands = lattice::scan(f, (0.0, 1.0), &discs, SCAN_CAP)?;
    let mut raw = 0;
    let mut hits = Vec::new();
    for x in cands {
        let xe = f.from_zvec(&x);
        if !xe.in_unit_interval()? {
            continue;
        }
        let i = ctx.parry.interval_index(&xe)?;
        let diff: Vec<i64> = s.u.iter().zip(&x).map(|(a, b)| a - b).collect();
        let addr = finite_address_i64(f, &diff, ctx.k)?;
        let xc = f.conj_i64(&x);
        let Some(bucket) = ctx.slices[i].buckets.get(&addr) else { continue };
        let near: Vec<&(Vec<i64>, Vec<Complex64>)> = bucket
            .iter()
            .filter(|(_, c)| {
                let p: Vec<Complex64> = c.iter().zip(&xc).map(|(a, b)| a + b).collect();
                place_dist(f, &p, &s.arch) <= ctx.r
            })
            .collect();
        if !near.is_empty() {
            raw += 1;
            hits.push((i, x, diff, near));
        }
    }
    if raw < 2 {
        return Ok((raw, raw));
    }
    let mut refined = 0;
    for (i, x, diff, near) in hits {
        if survives(ctx, s, i, &x, &diff, &near)? {
            refined += 1;
        }
    }
    Ok((raw, refined))
}

/// Descend from the matched level-k offsets and keep those still within the tail radius.
fn survives(
    ctx: &Ctx,
    s: &Sample,
    i: usize,
    x: &[i64],
    diff: &[i64],
    near: &[&(Vec<i64>, Vec<Complex64>)],
) -> Result<bool> {
    let f = ctx.f;
    let m = f.max_digit();
    let unit = f.is_unit();
    let xc = f.conj_i64(x);
    let target: Vec<Complex64> = s.arch.iter().zip(&xc).map(|(a, b)| a - b).collect();
    let pk = f.beta_pow_i64(ctx.k)?;
    // (offset, conjugates, (U - x - w) / β^j)
    let mut frontier = Vec::new();
    for (w, c) in near {
        let rest: Vec<i64> = diff.iter().zip(w.iter()).map(|(a, b)| a - b).collect();
        let mut z = rest;
        for _ in 0..ctx.k {
            if unit {
                break;
            }
            z = f.div_beta_i64(&z)?;
        }
        frontier.push((w.clone(), c.clone(), z));
    }
    let mut pj = pk;
    let mut bj: Vec<Complex64> = ctx.conj_beta.iter().map(|b| b.powu(ctx.k as u32)).collect();
    for j in ctx.k..ctx.depth {
        let pnext = f.mul_beta_i64(&pj)?;
        let g: Vec<i64> = pnext.iter().zip(&pj).map(|(a, b)| a - m * b).collect();
        let r = pad(tail_radius(f, j + 1));
        let mut next = Vec::new();
        for (w, c, z) in &frontier {
            let need = if unit { None } else { Some(f.residue_i64(z)?) };
            for (a, w2) in crate::tiles::rauzy_children(f, &ctx.slices[i].cmp, w, &pj, &g)? {
                if need.is_some_and(|n| a.rem_euclid(f.abs_norm() as i64) != n) {
                    continue;
                }
                let c2: Vec<Complex64> = c.iter().zip(&bj).map(|(p, b)| p + b * a as f64).collect();
                if place_dist(f, &c2, &target) > r {
                    continue;
                }
                let z2 = if unit {
                    z.clone()
                } else {
                    let mut t = z.clone();
                    t[0] -= a;
                    f.div_beta_i64(&t)?
                };
                next.push((w2, c2, z2));
            }
        }
        if next.is_empty() {
            return Ok(false);
        }
        if next.len() > REFINE_BUDGET {
            return Ok(true);
        }
        frontier = next;
        pj = pnext;
        bj = bj.iter().zip(&ctx.conj_beta).map(|(a, b)| a * b).collect();
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::parry_data;
    use crate::field::make_beta;

    #[test]
    fn step_and_membership() {
        let f = make_beta("1,-3,-2", 128).unwrap();
        let x = f.parse_element("b-3").unwrap();
        assert_eq!(nat_ext_step(&NatExtPoint::diagonal(x)).unwrap().x, f.zero());
        assert!(nat_ext_contains(&f.from_ratio(1, 7)));
        assert!(!nat_ext_contains(&f.from_ratio(1, 2)));
        assert!(nat_ext_contains(&f.zero()));
        let out = NatExtPoint::diagonal(f.from_int(1));
        assert!(matches!(nat_ext_step(&out), Err(Error::OutOfDomain)));
    }

    #[test]
    fn slices_partition() {
        let f = make_beta("1,-2,-2", 128).unwrap();
        let p = parry_data(&f).unwrap();
        let s0 = domain_slices(&p, 0).unwrap();
        assert_eq!(s0.len(), 2);
        assert!(s0.iter().all(|s| s.points.len() == 1 && s.points[0].iter().all(|c| c.abs() < 1e-12)));
        let s = domain_slices(&p, 6).unwrap();
        let mut ends: Vec<_> = s.iter().map(|s| (s.v.clone(), s.v_hat.clone())).collect();
        ends.sort_by(|a, b| a.0.cmp_exact(&b.0).unwrap());
        assert!(ends[0].0.is_zero());
        for w in ends.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        assert_eq!(ends.last().unwrap().1, f.one());
    }

    #[test]
    fn covering_quadratic() {
        let f = make_beta("1,-2,-2", 128).unwrap();
        let p = parry_data(&f).unwrap();
        let r = covering_degree_estimate(&p, 8, 400, (0.0, 1.0), 7).unwrap();
        assert_eq!(r.modal_count, 1);
        assert!(r.fraction_one > 0.95, "{r:?}");
        assert!(!r.refined_histogram.contains_key(&0), "{r:?}");
        let r = covering_degree_estimate(&p, 6, 50, (2.0, 3.0), 7).unwrap();
        assert_eq!(r.out_of_stripe, 50);
    }
}
