//! One PASS/FAIL line per acceptance criterion. Run with `cargo test --test acceptance`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use betatile::boundary::{build_boundary_graph, decide_tiling, spectral_radius_enclosure, BoundaryGraph, Verdict};
use betatile::dynamics::{parry_data, sort_elements, t_preimages, ParryData};
use betatile::gamma::{gamma_quadratic, gamma_scan};
use betatile::lattice::hnf;
use betatile::natext::covering_degree_estimate;
use betatile::periodicity::{check_w, exclusive_point, pur_set_integral, t_iter};
use betatile::tiles::{integral_cloud, rauzy_cloud, translation_identity_check};
use betatile::{finite_address, make_beta, BetaField, FieldElement};

type Check = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    /// Known to be unattainable as stated; a FAIL is reported but does not fail the target.
    unattainable: bool,
    run: fn() -> Check,
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T: std::fmt::Debug>(x: T) -> String {
    format!("{x:?}")
}

fn field(p: &str) -> BetaField {
    make_beta(p, 128).unwrap()
}

fn parry(p: &str) -> ParryData {
    parry_data(&field(p)).unwrap()
}

fn elems(f: &BetaField, xs: &[&str]) -> Vec<FieldElement> {
    xs.iter().map(|s| f.parse_element(s).unwrap()).collect()
}

/// Exact decimal `n / 10^e`.
fn dec(n: i64, e: u32) -> BigRational {
    BigRational::new(n.into(), 10i64.pow(e).into())
}

// ---- 1 ----

fn parry_qm() -> Check {
    let t = Instant::now();
    let p = parry("1,-2,-2");
    let f = &p.field;
    ensure(p.v == elems(f, &["0", "b-2"]), format!("V = {:?}", p.v.iter().map(|x| x.pretty()).collect::<Vec<_>>()))?;
    ensure(p.lattice == elems(f, &["b-3"]), "L != Z(b-3)")?;
    let t1 = t.elapsed();

    let t = Instant::now();
    let p = parry("1,-2,1,-1");
    let f = &p.field;
    let mut want = elems(f, &["1", "b-1", "b^2-b-1", "b^2-2*b+1"]);
    sort_elements(&mut want).map_err(e)?;
    ensure(
        p.v_hat == want,
        format!("V^ = {:?}", p.v_hat.iter().map(|x| x.pretty()).collect::<Vec<_>>()),
    )?;
    let rows: Vec<_> = elems(f, &["b-2", "b^2-2*b"]).iter().map(|x| x.num().to_vec()).collect();
    let ours: Vec<_> = p.lattice.iter().map(|x| x.num().to_vec()).collect();
    ensure(hnf(&rows) == ours, "L != <b-2, b^2-2b>")?;
    ensure(p.qm, "QM should hold for t = 2")?;
    let t2 = t.elapsed();

    let t = Instant::now();
    let p = parry("1,0,-1,-1");
    // L = Z[b]
    ensure(!p.qm && p.lattice_rank() == 3, format!("QM for b^3=b+1: rank {}", p.lattice_rank()))?;
    let full = elems(&p.field, &["1", "b", "b^2"]);
    ensure(full.iter().all(|x| p.lattice_contains(x)), "L != Z[b] for b^3=b+1")?;
    let t3 = t.elapsed();
    let worst = t1.max(t2).max(t3);
    ensure(worst < Duration::from_secs(1), format!("slowest case {worst:?}"))?;
    Ok(format!("V, L, V^ exact; QM true/false as stated; slowest {:.3}s", worst.as_secs_f64()))
}

// ---- 2 ----

type Triple = (usize, Vec<String>, usize);

fn edge_multiset(g: &BoundaryGraph) -> BTreeMap<(Triple, Triple, i64, i64), usize> {
    let key = |i: usize| -> Triple {
        let n = &g.nodes[i];
        (n.v.unwrap(), n.x.coeff_strings(), n.w.unwrap())
    };
    let mut m = BTreeMap::new();
    for ed in &g.edges {
        *m.entry((key(ed.from), key(ed.to), ed.a, ed.b)).or_insert(0) += 1;
    }
    m
}

fn boundary_graph() -> Check {
    let p = parry("1,-3,-2");
    let f = &p.field;
    let g = build_boundary_graph(&p).map_err(e)?;
    // v = b - 3, 1 - v = 4 - b, v - 1 = b - 4
    let keep = elems(f, &["b-3", "3-b", "4-b", "b-4"]);
    let sub = g.restrict_middles(&keep);

    // transition list for 2b > a, written out for a = 3, b = 2 (V index 0 is 0, 1 is v)
    let node = |v: usize, x: &str, w: usize| -> Triple { (v, f.parse_element(x).unwrap().coeff_strings(), w) };
    let a_ = node(1, "b-4", 0);
    let b_ = node(0, "b-4", 0);
    let c_ = node(0, "4-b", 0);
    let d_ = node(0, "4-b", 1);
    let e_ = node(0, "b-3", 1);
    let g_ = node(1, "3-b", 0);
    let mut want: BTreeMap<(Triple, Triple, i64, i64), usize> = BTreeMap::new();
    let mut add = |src: &Triple, dst: &Triple, ds: std::ops::Range<i64>, shift: i64| {
        for d in ds {
            *want.entry((src.clone(), dst.clone(), d, d + shift)).or_insert(0) += 1;
        }
    };
    for s in [&a_, &b_] {
        add(s, &c_, 0..0, 2);
        add(s, &d_, 0..2, 2);
    }
    for s in [&d_, &c_] {
        add(s, &b_, 2..2, -2);
        add(s, &a_, 2..4, -2);
    }
    add(&e_, &c_, 0..1, 1);
    add(&e_, &d_, 1..2, 1);
    add(&g_, &b_, 1..2, -1);
    add(&g_, &a_, 2..3, -1);

    let got = edge_multiset(&sub);
    ensure(got == want, format!("induced subgraph differs: {} vs {} labelled edges", got.len(), want.len()))?;
    let nodes: BTreeSet<Triple> = (0..sub.len())
        .map(|i| (sub.nodes[i].v.unwrap(), sub.nodes[i].x.coeff_strings(), sub.nodes[i].w.unwrap()))
        .collect();
    let want_nodes: BTreeSet<Triple> = [a_, b_, c_, d_, e_, g_].into_iter().collect();
    ensure(nodes == want_nodes, "node set differs")?;

    let merged = sub.merge_by_middle();
    ensure(merged.len() == 4, format!("merged graph has {} states", merged.len()))?;
    ensure(merged.out_degrees().iter().all(|&d| d == 2), "merged out-degrees != 2")?;
    let (lo, hi) = spectral_radius_enclosure(&merged, 8);
    let two = BigRational::from_integer(2.into());
    ensure(lo == two && hi == two, format!("rho enclosure [{lo}, {hi}]"))?;
    Ok(format!("6 states, {} edges match; merged 4 states, rho = 2 exactly", sub.edges.len()))
}

// ---- 3 ----

fn tiling_verdicts() -> Check {
    let mut out = Vec::new();
    for poly in ["1,-1,-1", "1,-2,-2", "1,-3,-2", "1,0,-1,-1"] {
        let t = Instant::now();
        let g = build_boundary_graph(&parry(poly)).map_err(e)?;
        let d = decide_tiling(&g);
        let dt = t.elapsed();
        ensure(d.verdict == Verdict::Tiling, format!("{poly}: {:?}", d.verdict))?;
        ensure(d.rho.1 < d.beta.0, format!("{poly}: rho_hi >= beta_lo"))?;
        ensure(dt < Duration::from_secs(60), format!("{poly}: {dt:?}"))?;
        out.push(format!(
            "{poly}: rho<={:.4} < beta>={:.4}",
            d.rho.1.to_f64().unwrap(),
            d.beta.0.to_f64().unwrap()
        ));
    }
    Ok(out.join("; "))
}

// ---- 4 ----

fn gamma_values() -> Check {
    let r = gamma_quadratic(3, 2).map_err(e)?;
    let f = field("1,-3,-2");
    let exact = r.exact_value.clone().ok_or("no exact value")?;
    ensure(exact == f.parse_element("1/(b+2)").unwrap(), format!("gamma(3,2) = {}", exact.pretty()))?;
    let (lo, hi) = r.enclosure.clone().ok_or("no enclosure")?;
    let tol = dec(1, 4);
    ensure(&lo - &tol <= dec(17977, 5) && dec(17977, 5) <= &hi + &tol, "enclosure misses 0.17977")?;

    let s = gamma_scan(&f, 200).map_err(e)?.scan.ok_or("no scan frontier")?;
    let first = s.first_non_pp.clone().ok_or("no non-pp rational with q <= 200")?;
    // the scan walks [0,1) upwards and stops at the first failure
    ensure(first >= dec(1797, 4), format!("non-pp {first} below 0.1797"))?;
    ensure(first >= dec(1798, 4) && first < dec(25, 2), format!("first non-pp {first} outside [0.1798, 0.25)"))?;

    for a in 1..=6 {
        let r = gamma_quadratic(a, 1).map_err(e)?;
        let v = r.exact_value.ok_or("no exact value")?;
        ensure(r.equality && v == v.field().one(), format!("gamma({a},1) != 1"))?;
    }
    let g = gamma_scan(&field("1,-1,-1"), 100).map_err(e)?.scan.ok_or("no scan frontier")?;
    ensure(g.first_non_pp.is_none(), "non-pp rational for golden ratio")?;
    Ok(format!(
        "1/(b+2) in [{:.6}, {:.6}]; first non-pp q<=200 is {first} ~ {:.4} ({} tested); golden q<=100: {} tested, none",
        lo.to_f64().unwrap(),
        hi.to_f64().unwrap(),
        first.to_f64().unwrap(),
        s.tested,
        g.tested
    ))
}

// ---- 5 ----

fn positive_conjugate() -> Check {
    let f = field("1,-3,1");
    let r = gamma_scan(&f, 20).map_err(e)?;
    let s = r.scan.clone().ok_or("no scan frontier")?;
    let wide = gamma_scan(&f, 200).map_err(e)?.scan.ok_or("no scan frontier")?;
    let detail = format!(
        "gamma = 0 via positive conjugate: {}; q<=20 first non-pp {}; q<=200 first non-pp {}",
        r.equality,
        s.first_non_pp.as_ref().map_or("none".into(), |x| x.to_string()),
        wide.first_non_pp.as_ref().map_or("none".into(), |x| x.to_string())
    );
    match &s.first_non_pp {
        Some(x) if *x < dec(5, 2) => Ok(detail),
        // every rational in (0, 0.05) has denominator > 20
        _ => Err(format!("no rational with q <= 20 lies in (0, 0.05); {detail}")),
    }
}

// ---- 6 ----

const BASES: [&str; 5] = ["1,-1,-1", "1,-2,-2", "1,-3,-2", "1,0,-1,-1", "1,-2,1,-1"];

fn frac(x: &FieldElement) -> FieldElement {
    x.add_int(-x.floor().unwrap().to_i64().unwrap())
}

fn random_point(rng: &mut ChaCha8Rng, p: &ParryData, max_shift: i64) -> FieldElement {
    let f = &p.field;
    let z: Vec<i64> = (0..f.degree()).map(|_| rng.gen_range(-30..30)).collect();
    let l = rng.gen_range(0..=max_shift);
    frac(&f.from_i64_coeffs(&z).mul(&f.beta_pow(-l)))
}

fn set(xs: Vec<FieldElement>) -> BTreeSet<Vec<String>> {
    xs.iter().map(|x| x.coeff_strings()).collect()
}

fn integral_preimages(x: &FieldElement, k: usize) -> Vec<FieldElement> {
    let mut cur = vec![x.clone()];
    for _ in 0..k {
        cur = cur.iter().flat_map(|y| t_preimages(y, true).unwrap()).collect();
    }
    cur
}

/// Sign of the conjugate in a quadratic field: `N(z) = z z'`, with the norm computed exactly.
fn conj_sign(z: &FieldElement) -> std::cmp::Ordering {
    let c = z.coeffs();
    let p = z.field().min_poly();
    let p0 = BigRational::from_integer(p[0].clone());
    let p1 = BigRational::from_integer(p[1].clone());
    let norm = &c[0] * &c[0] - &c[0] * &c[1] * &p1 + &c[1] * &c[1] * &p0;
    let zero = BigRational::from_integer(0.into());
    if norm == zero {
        return std::cmp::Ordering::Equal;
    }
    if norm.cmp(&zero) == z.sign().unwrap() {
        std::cmp::Ordering::Greater
    } else {
        std::cmp::Ordering::Less
    }
}

fn property_suite() -> Check {
    let ps: Vec<ParryData> = BASES.iter().map(|b| parry(b)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut cases: BTreeMap<&str, usize> = BTreeMap::new();
    let mut bad: Vec<String> = Vec::new();
    let mut note = |name: &'static str, ok: bool, ctx: String, bad: &mut Vec<String>| {
        *cases.entry(name).or_insert(0) += 1;
        if !ok {
            bad.push(format!("{name}: {ctx}"));
        }
    };
    for round in 0..40 {
        let bi = round % BASES.len();
        let p = &ps[bi];
        let f = &p.field;
        let ctx = |x: &FieldElement| format!("{} x = {}", BASES[bi], x.pretty());

        let x = random_point(&mut rng, p, 3);
        let k = rng.gen_range(0..4);
        let fine = set(rauzy_cloud(&x, k + 1).unwrap().points());
        let mut union = Vec::new();
        let mut total = 0;
        for y in t_preimages(&x, false).unwrap() {
            let c = rauzy_cloud(&y, k).unwrap();
            total += c.len();
            union.extend(c.points().iter().map(|u| u.mul_beta()));
        }
        let union = set(union);
        note("refinement", union.len() == total && union == fine, ctx(&x), &mut bad);

        let k = rng.gen_range(0..5);
        let a = rauzy_cloud(&x, k).unwrap().offset_set();
        let b = rauzy_cloud(&x, k + 1).unwrap().offset_set();
        note("nesting", a.is_subset(&b), ctx(&x), &mut bad);

        let k = rng.gen_range(0..=6);
        let i = p.interval_index(&x).unwrap();
        note("translation", translation_identity_check(p, &x, i, k).unwrap(), ctx(&x), &mut bad);

        let xi = random_point(&mut rng, p, 0);
        let k = rng.gen_range(0..=6);
        let zero_addr: Vec<FieldElement> = rauzy_cloud(&xi, k)
            .unwrap()
            .points()
            .into_iter()
            .filter(|u| finite_address(u, k).unwrap().iter().all(|&d| d == 0))
            .collect();
        note("integral-slice", set(zero_addr) == set(integral_cloud(&xi, k).unwrap().points()), ctx(&xi), &mut bad);

        let yi = random_point(&mut rng, p, 0);
        if xi != yi {
            let k = rng.gen_range(1..5);
            let a = integral_preimages(&xi, k);
            let c = integral_preimages(&yi, k);
            let ok = a.iter().all(|u| u.is_integral() && t_iter(u, k).unwrap() == xi && !c.contains(u))
                && c.iter().all(|u| t_iter(u, k).unwrap() == yi);
            note("preimage-partition", ok, ctx(&xi), &mut bad);
        }

        if !f.is_unit() && f.degree() == 2 {
            let n = f.abs_norm() as u32;
            let k = rng.gen_range(0..10);
            let u = f.from_i64_coeffs(&[rng.gen_range(-30..30), rng.gen_range(-30..30)]);
            let v = f.from_i64_coeffs(&[rng.gen_range(-30..30), rng.gen_range(-30..30)]);
            let du = finite_address(&u, k).unwrap();
            let mut s = f.zero();
            for (j, &d) in du.iter().enumerate() {
                s = &s + &f.beta_pow(j as i64).mul_i64(d as i64);
            }
            let scale = f.beta_pow(-(k as i64));
            let ok = du.len() == k
                && du.iter().all(|&d| d < n)
                && (&u - &s).mul(&scale).is_integral()
                && ((finite_address(&v, k).unwrap() == du) == (&u - &v).mul(&scale).is_integral());
            note("address-round-trip", ok, ctx(&u), &mut bad);
        }

        if f.degree() == 2 && xi != yi {
            let k = rng.gen_range(0..=8);
            let s = conj_sign(&(&xi - &yi));
            let cx = integral_cloud(&xi, k).unwrap().points();
            let cy = integral_cloud(&yi, k).unwrap().points();
            let ok = cx.iter().all(|a| cy.iter().all(|b| conj_sign(&(a - b)) == s));
            note("quadratic-order", ok, ctx(&xi), &mut bad);
        }
    }
    let total: usize = cases.values().sum();
    ensure(bad.is_empty(), format!("{} violations, first: {}", bad.len(), bad.first().cloned().unwrap_or_default()))?;
    ensure(total >= 200, format!("only {total} cases"))?;
    let per: Vec<String> = cases.iter().map(|(k, v)| format!("{k} {v}")).collect();
    Ok(format!("{total} cases over {} bases, 0 violations ({})", BASES.len(), per.join(", ")))
}

// ---- 7 ----

fn weak_finiteness() -> Check {
    let mut out = Vec::new();
    for poly in ["1,-3,-2", "1,-2,-2", "1,-3,1"] {
        let p = parry(poly);
        let f = &p.field;
        let pur = pur_set_integral(f).map_err(e)?;
        let w = check_w(&pur, 10, 60).map_err(e)?;
        ensure(w.holds(), format!("{poly}: no witness for {} points", w.unknown.len()))?;
        for wi in &w.witnesses {
            let ok = t_iter(&(&wi.x + &wi.y), wi.n).map_err(e)?.is_zero() && t_iter(&wi.y, wi.n).map_err(e)?.is_zero();
            ensure(ok, format!("{poly}: witness for {} fails", wi.x.pretty()))?;
        }
        let z = exclusive_point(&p, &pur, &w).map_err(e)?;
        ensure(z.verified, format!("{poly}: exclusive point not verified"))?;
        let scale = f.beta_pow(-(z.n as i64));
        for x in &pur {
            let y = x + &z.z.mul(&scale);
            let ok = y.in_unit_interval().map_err(e)? && t_iter(&y, z.n).map_err(e)?.is_zero();
            ensure(ok, format!("{poly}: T^n(x + b^-n z) != 0 at x = {}", x.pretty()))?;
        }
        out.push(format!("{poly}: |P| = {}, z = {}, n = {}", pur.len(), z.z.pretty(), z.n));
    }
    Ok(out.join("; "))
}

// ---- 8 ----

fn covering_degree() -> Check {
    let p = parry("1,-2,-2");
    let r = covering_degree_estimate(&p, 10, 10_000, (0.0, 1.0), 1).map_err(e)?;
    let detail = format!(
        "in-stripe {}, modal {}, refined count-1 share {:.4} (raw {:.4}), refine depth {}",
        r.in_stripe, r.modal_count, r.fraction_one, r.raw_fraction_one, r.refine_depth
    );
    ensure(r.modal_count == 1 && r.fraction_one >= 0.95, detail.clone())?;
    Ok(detail)
}

// ---- 9 ----

fn excluded() -> Check {
    Ok("Haar-measure statements and the natural-extension isomorphism are not tested directly".into())
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "Parry data and QM", limit: Duration::from_secs(3), unattainable: false, run: parry_qm },
        Criterion { id: 2, name: "boundary graph 3b+2", limit: Duration::from_secs(10), unattainable: false, run: boundary_graph },
        Criterion { id: 3, name: "tiling verdicts", limit: Duration::from_secs(240), unattainable: false, run: tiling_verdicts },
        Criterion { id: 4, name: "gamma exact and scan", limit: Duration::from_secs(300), unattainable: false, run: gamma_values },
        Criterion { id: 5, name: "positive-conjugate shortcut", limit: Duration::from_secs(10), unattainable: true, run: positive_conjugate },
        Criterion { id: 6, name: "exact set identities", limit: Duration::from_secs(600), unattainable: false, run: property_suite },
        Criterion { id: 7, name: "(W) and exclusive point", limit: Duration::from_secs(60), unattainable: false, run: weak_finiteness },
        Criterion { id: 8, name: "covering degree", limit: Duration::from_secs(120), unattainable: false, run: covering_degree },
    ];
    let mut unexpected = 0;
    for c in &criteria {
        let t = Instant::now();
        let res = (c.run)();
        let dt = t.elapsed();
        let res = match res {
            Ok(d) if dt > c.limit => Err(format!("over time limit {:?}; {d}", c.limit)),
            r => r,
        };
        match res {
            Ok(d) => println!("criterion {} PASS  {} [{:.2}s] {}", c.id, c.name, dt.as_secs_f64(), d),
            Err(d) => {
                let tag = if c.unattainable { " (known unattainable)" } else { "" };
                println!("criterion {} FAIL{}  {} [{:.2}s] {}", c.id, tag, c.name, dt.as_secs_f64(), d);
                if !c.unattainable {
                    unexpected += 1;
                }
            }
        }
    }
    println!("criterion 9 SKIP  excluded: {}", excluded().unwrap());
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
