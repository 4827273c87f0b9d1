use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_traits::ToPrimitive;
use proptest::prelude::*;

use betatile::boundary::{build_boundary_graph, export_dot, parse_dot_edges, BoundaryGraph};
use betatile::dynamics::{parry_data, t_preimages, ParryData};
use betatile::periodicity::t_iter;
use betatile::tiles::{integral_cloud, rauzy_cloud, translation_identity_check};
use betatile::{finite_address, make_beta, FieldElement};

const BASES: [&str; 6] = ["1,-1,-1", "1,-2,-2", "1,-3,-2", "1,-4,-2", "1,0,-1,-1", "1,-2,1,-1"];
const QUADRATIC: [usize; 4] = [0, 1, 2, 3];
const NON_UNIT: [usize; 3] = [1, 2, 3];

fn parry(i: usize) -> &'static ParryData {
    static CELL: OnceLock<Vec<ParryData>> = OnceLock::new();
    &CELL.get_or_init(|| {
        BASES.iter().map(|p| parry_data(&make_beta(p, 128).unwrap()).unwrap()).collect()
    })[i]
}

fn graph(i: usize) -> &'static BoundaryGraph {
    static CELL: OnceLock<Vec<BoundaryGraph>> = OnceLock::new();
    &CELL.get_or_init(|| (0..BASES.len()).map(|i| build_boundary_graph(parry(i)).unwrap()).collect())[i]
}

fn frac(x: &FieldElement) -> FieldElement {
    x.add_int(-x.floor().unwrap().to_i64().unwrap())
}

/// `frac(z / beta^l)`: a point of `[0,1) ∩ Z[1/beta]`.
fn point(p: &ParryData, z: &[i64], l: i64) -> FieldElement {
    let f = &p.field;
    let z = f.from_i64_coeffs(&z[..f.degree()]);
    frac(&z.mul(&f.beta_pow(-l)))
}

fn point_set(xs: Vec<FieldElement>) -> BTreeSet<Vec<String>> {
    xs.iter().map(|x| x.coeff_strings()).collect()
}

/// `T^{-k}(x) ∩ Z[beta]`.
fn integral_preimages(x: &FieldElement, k: usize) -> Vec<FieldElement> {
    let mut cur = vec![x.clone()];
    for _ in 0..k {
        cur = cur.iter().flat_map(|y| t_preimages(y, true).unwrap()).collect();
    }
    cur
}

fn coeffs() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-30i64..30, 3)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, ..ProptestConfig::default() })]

    #[test]
    fn refinement_identity(b in 0..BASES.len(), z in coeffs(), l in 0i64..4, k in 0usize..4) {
        let p = parry(b);
        let x = point(p, &z, l);
        let fine = point_set(rauzy_cloud(&x, k + 1).unwrap().points());
        let mut union = Vec::new();
        let mut total = 0;
        for y in t_preimages(&x, false).unwrap() {
            let c = rauzy_cloud(&y, k).unwrap();
            total += c.len();
            union.extend(c.points().iter().map(|q| q.mul_beta()));
        }
        let union = point_set(union);
        // disjoint union
        prop_assert_eq!(union.len(), total);
        prop_assert_eq!(fine, union);
    }

    #[test]
    fn nesting(b in 0..BASES.len(), z in coeffs(), l in 0i64..4, k in 0usize..5) {
        let x = point(parry(b), &z, l);
        let a = rauzy_cloud(&x, k).unwrap().offset_set();
        let c = rauzy_cloud(&x, k + 1).unwrap().offset_set();
        prop_assert!(a.is_subset(&c));
    }

    #[test]
    fn translation_identity(b in 0..BASES.len(), z in coeffs(), l in 0i64..4, k in 0usize..7) {
        let p = parry(b);
        let x = point(p, &z, l);
        let i = p.interval_index(&x).unwrap();
        prop_assert!(translation_identity_check(p, &x, i, k).unwrap());
    }

    #[test]
    fn integral_slice(b in 0..BASES.len(), z in coeffs(), k in 0usize..7) {
        let x = point(parry(b), &z, 0);
        let r = rauzy_cloud(&x, k).unwrap();
        let zero_addr: Vec<FieldElement> = r
            .points()
            .into_iter()
            .filter(|q| finite_address(q, k).unwrap().iter().all(|&d| d == 0))
            .collect();
        prop_assert_eq!(point_set(zero_addr), point_set(integral_cloud(&x, k).unwrap().points()));
    }

    #[test]
    fn preimage_partition(b in 0..BASES.len(), z1 in coeffs(), z2 in coeffs(), k in 1usize..6) {
        let p = parry(b);
        let (x, y) = (point(p, &z1, 0), point(p, &z2, 0));
        prop_assume!(x != y);
        let a = integral_preimages(&x, k);
        let c = integral_preimages(&y, k);
        for u in &a {
            prop_assert!(u.is_integral());
            prop_assert_eq!(&t_iter(u, k).unwrap(), &x);
            prop_assert!(!c.contains(u));
        }
        for u in &c {
            prop_assert_eq!(&t_iter(u, k).unwrap(), &y);
        }
    }

    #[test]
    fn address_round_trip(bi in 0..NON_UNIT.len(), z1 in coeffs(), z2 in coeffs(), k in 0usize..10) {
        let f = &parry(NON_UNIT[bi]).field;
        let n = f.abs_norm() as u32;
        let u = f.from_i64_coeffs(&z1[..2]);
        let v = f.from_i64_coeffs(&z2[..2]);
        let du = finite_address(&u, k).unwrap();
        prop_assert_eq!(du.len(), k);
        prop_assert!(du.iter().all(|&d| d < n));
        let mut s = f.zero();
        for (j, &d) in du.iter().enumerate() {
            s = &s + &f.beta_pow(j as i64).mul_i64(d as i64);
        }
        prop_assert!((&u - &s).mul(&f.beta_pow(-(k as i64))).is_integral());
        let same = finite_address(&v, k).unwrap() == du;
        prop_assert_eq!(same, (&u - &v).mul(&f.beta_pow(-(k as i64))).is_integral());
    }

    #[test]
    fn quadratic_order(bi in 0..QUADRATIC.len(), z1 in coeffs(), z2 in coeffs(), k in 0usize..9) {
        let p = parry(QUADRATIC[bi]);
        let f = &p.field;
        let (x, y) = (point(p, &z1, 0), point(p, &z2, 0));
        prop_assume!(x != y);
        let cx = integral_cloud(&x, k).unwrap().points();
        let cy = integral_cloud(&y, k).unwrap().points();
        let s = conj_sign(f, &(&x - &y));
        for a in &cx {
            for b in &cy {
                prop_assert_eq!(conj_sign(f, &(a - b)), s);
            }
        }
    }

    #[test]
    fn dot_round_trip(b in 0..BASES.len()) {
        let g = graph(b);
        let parsed = parse_dot_edges(&export_dot(g)).unwrap();
        let mut expected = std::collections::BTreeMap::new();
        for e in &g.edges {
            *expected.entry((e.from, e.to, e.a, e.b)).or_insert(0usize) += 1;
        }
        prop_assert_eq!(parsed, expected);
    }

    #[test]
    fn negation_symmetry(b in 0..BASES.len(), pick in 0usize..1000) {
        let g = graph(b);
        let i = pick % g.len();
        let n = &g.nodes[i];
        let j = g.find(n.w, &n.x.neg(), n.v);
        prop_assert!(j.is_some());
        let j = j.unwrap();
        let fwd: BTreeSet<(i64, i64)> = g.edges.iter().filter(|e| e.from == i).map(|e| (e.b, e.a)).collect();
        let back: BTreeSet<(i64, i64)> = g.edges.iter().filter(|e| e.from == j).map(|e| (e.a, e.b)).collect();
        prop_assert_eq!(fwd, back);
    }
}

/// Sign of the Galois conjugate of an element of a quadratic field: `z' = N(z)/z`.
fn conj_sign(f: &betatile::BetaField, z: &FieldElement) -> std::cmp::Ordering {
    let c = z.coeffs();
    let p = f.min_poly();
    // x^2 + p1 x + p0: beta + beta' = -p1, beta beta' = p0
    let (a, b) = (&c[0], &c[1]);
    let p0 = num_rational::BigRational::from_integer(p[0].clone());
    let p1 = num_rational::BigRational::from_integer(p[1].clone());
    let norm = a * a - a * b * &p1 + b * b * &p0;
    let sn = norm.cmp(&num_rational::BigRational::from_integer(0.into()));
    let sz = z.sign().unwrap();
    if sn == std::cmp::Ordering::Equal {
        std::cmp::Ordering::Equal
    } else if sn == sz {
        std::cmp::Ordering::Greater
    } else {
        std::cmp::Ordering::Less
    }
}

#[test]
fn conj_sign_matches_float() {
    for b in QUADRATIC {
        let f = &parry(b).field;
        for z in [[1i64, 0], [0, 1], [3, -2], [-7, 4], [2, 5]] {
            let e = f.from_i64_coeffs(&z);
            let c = e.conjugates()[0].re;
            assert_eq!(conj_sign(f, &e), c.partial_cmp(&0.0).unwrap(), "{} {:?}", BASES[b], z);
        }
    }
}
