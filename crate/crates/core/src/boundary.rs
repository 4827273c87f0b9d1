//! The boundary graph: pairs of tiles that meet, and the spectral test for tilings.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::dynamics::{parry_data, ParryData};
use crate::error::{Error, Result};
use crate::lattice;
use num_complex::Complex64;
use crate::field::{BetaField, FieldElement};
use crate::rat;

/// Default cap on the number of coefficient vectors scanned for candidate middles.
pub const BOX_CAP: u64 = 1_000_000;

/// A node `[v, x, w]`. Merged graphs keep only the middle `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphNode {
    pub v: Option<usize>,
    pub x: FieldElement,
    pub w: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub a: i64,
    pub b: i64,
}

#[derive(Clone, Debug)]
pub struct BoundaryGraph {
    pub field: BetaField,
    /// The set V that node components `v`, `w` index into.
    pub v_values: Vec<FieldElement>,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<Edge>,
    pub rho_enclosure: Option<(BigRational, BigRational)>,
}

impl BoundaryGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    /// Edge multiplicities.
    pub fn adjacency(&self) -> Vec<Vec<u64>> {
        let n = self.nodes.len();
        let mut m = vec![vec![0u64; n]; n];
        for e in &self.edges {
            m[e.from][e.to] += 1;
        }
        m
    }
    pub fn out_degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.nodes.len()];
        for e in &self.edges {
            d[e.from] += 1;
        }
        d
    }
    pub fn node_label(&self, i: usize) -> String {
        let n = &self.nodes[i];
        match (n.v, n.w) {
            (Some(v), Some(w)) => format!(
                "[{}, {}, {}]",
                self.v_values[v].pretty(),
                n.x.pretty(),
                self.v_values[w].pretty()
            ),
            _ => n.x.pretty(),
        }
    }
    pub fn find(&self, v: Option<usize>, x: &FieldElement, w: Option<usize>) -> Option<usize> {
        self.nodes.iter().position(|n| n.v == v && &n.x == x && n.w == w)
    }
    /// Distinct middles.
    pub fn middles(&self) -> Vec<FieldElement> {
        let mut out: Vec<FieldElement> = Vec::new();
        for n in &self.nodes {
            if !out.contains(&n.x) {
                out.push(n.x.clone());
            }
        }
        out
    }

    /// Subgraph induced by nodes whose middle lies in `keep`.
    pub fn restrict_middles(&self, keep: &[FieldElement]) -> BoundaryGraph {
        let idx: Vec<usize> = (0..self.nodes.len()).filter(|&i| keep.contains(&self.nodes[i].x)).collect();
        self.induced(&idx)
    }

    fn induced(&self, idx: &[usize]) -> BoundaryGraph {
        let map: HashMap<usize, usize> = idx.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let edges = self
            .edges
            .iter()
            .filter_map(|e| Some(Edge { from: *map.get(&e.from)?, to: *map.get(&e.to)?, a: e.a, b: e.b }))
            .collect();
        BoundaryGraph {
            field: self.field.clone(),
            v_values: self.v_values.clone(),
            nodes: idx.iter().map(|&i| self.nodes[i].clone()).collect(),
            edges,
            rho_enclosure: None,
        }
    }

    /// Drop nodes without outgoing edges until none are left.
    pub fn prune(&self) -> BoundaryGraph {
        let n = self.nodes.len();
        let mut alive = vec![true; n];
        let mut outdeg = self.out_degrees();
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            preds[e.to].push(e.from);
        }
        let mut stack: Vec<usize> = (0..n).filter(|&i| outdeg[i] == 0).collect();
        while let Some(i) = stack.pop() {
            if !alive[i] {
                continue;
            }
            alive[i] = false;
            for &p in &preds[i] {
                if alive[p] {
                    outdeg[p] -= 1;
                    if outdeg[p] == 0 {
                        stack.push(p);
                    }
                }
            }
        }
        let idx: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
        self.induced(&idx)
    }

    /// Merge nodes with the same middle; parallel edges are kept once per (label, target).
    pub fn merge_by_middle(&self) -> BoundaryGraph {
        let middles = self.middles();
        let pos = |x: &FieldElement| middles.iter().position(|m| m == x).unwrap();
        let mut set: BTreeSet<Edge> = BTreeSet::new();
        for e in &self.edges {
            set.insert(Edge {
                from: pos(&self.nodes[e.from].x),
                to: pos(&self.nodes[e.to].x),
                a: e.a,
                b: e.b,
            });
        }
        BoundaryGraph {
            field: self.field.clone(),
            v_values: self.v_values.clone(),
            nodes: middles.into_iter().map(|x| GraphNode { v: None, x, w: None }).collect(),
            edges: set.into_iter().collect(),
            rho_enclosure: None,
        }
    }

    fn sort_canonical(&mut self) {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        let keys: Vec<(Vec<BigInt>, BigInt, Option<usize>, Option<usize>)> = self
            .nodes
            .iter()
            .map(|n| (n.x.num().to_vec(), n.x.den().clone(), n.v, n.w))
            .collect();
        order.sort_by(|&i, &j| keys[i].cmp(&keys[j]));
        let mut inv = vec![0; order.len()];
        for (k, &i) in order.iter().enumerate() {
            inv[i] = k;
        }
        self.nodes = order.iter().map(|&i| self.nodes[i].clone()).collect();
        for e in self.edges.iter_mut() {
            e.from = inv[e.from];
            e.to = inv[e.to];
        }
        self.edges.sort();
    }
}

/// Bound on `|x^sigma|` for middles at each place, `B_sigma` summed over the worst `v`, `w`.
fn conj_bounds(parry: &ParryData) -> Vec<f64> {
    let f = &parry.field;
    let m = f.max_digit() as f64;
    let vc: Vec<Vec<f64>> = parry.v.iter().map(|v| v.conjugates().iter().map(|z| z.norm()).collect()).collect();
    f.places()
        .iter()
        .enumerate()
        .map(|(k, pl)| {
            let r = pl.approx.norm();
            let vmax = vc.iter().map(|c| c[k]).fold(0.0, f64::max);
            3.0 * vmax + 2.0 * m / (1.0 - r)
        })
        .collect()
}

/// Middles `x in Z[beta] \ {0}` with `-1 < x < 1` and every conjugate within the a-priori
/// bound, as i64 coefficient vectors.
pub fn candidate_middles(parry: &ParryData, cap: u64) -> Result<Vec<Vec<i64>>> {
    let f = &parry.field;
    let bounds = conj_bounds(parry);
    let discs: Vec<(Complex64, f64)> = bounds.iter().map(|&b| (Complex64::new(0.0, 0.0), b)).collect();
    let xs = lattice::scan(f, (-1.0, 1.0), &discs, cap)?;
    Ok(xs.into_iter().filter(|v| v.iter().any(|&c| c != 0)).collect())
}

/// Candidate triples `(v, x, w)` (indices into V) with `w - v^ < x < w^ - v` checked exactly.
pub fn candidate_nodes(parry: &ParryData) -> Result<Vec<(usize, Vec<i64>, usize)>> {
    candidate_nodes_capped(parry, BOX_CAP)
}

pub fn candidate_nodes_capped(parry: &ParryData, cap: u64) -> Result<Vec<(usize, Vec<i64>, usize)>> {
    let f = &parry.field;
    let xs = candidate_middles(parry, cap)?;
    let vi: Vec<Vec<i64>> = parry.v.iter().map(|v| v.to_i64_vec().ok_or(Error::Overflow)).collect::<Result<_>>()?;
    let vh: Vec<Vec<i64>> =
        (0..parry.v.len()).map(|i| parry.successor(i).to_i64_vec().ok_or(Error::Overflow)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for x in &xs {
        for v in 0..vi.len() {
            for w in 0..vi.len() {
                // x - (w - v^) > 0 and (w^ - v) - x > 0
                let l: Vec<i64> = (0..x.len()).map(|k| x[k] - vi[w][k] + vh[v][k]).collect();
                if f.sign_i64(&l)? != std::cmp::Ordering::Greater {
                    continue;
                }
                let u: Vec<i64> = (0..x.len()).map(|k| vh[w][k] - vi[v][k] - x[k]).collect();
                if f.sign_i64(&u)? != std::cmp::Ordering::Greater {
                    continue;
                }
                out.push((v, x.clone(), w));
            }
        }
    }
    Ok(out)
}

/// `(a + v_i)/beta` lands in `[v_j, v^_j)`: table `[i][a] -> Some(j)`.
fn digit_targets(parry: &ParryData) -> Result<Vec<Vec<Option<usize>>>> {
    let f = &parry.field;
    let one = f.one();
    parry
        .v
        .iter()
        .map(|v| {
            (0..=f.max_digit())
                .map(|a| {
                    let y = v.add_int(a).div_beta();
                    if y.lt(&one)? {
                        parry.interval_index(&y).map(Some)
                    } else {
                        Ok(None)
                    }
                })
                .collect()
        })
        .collect()
}

/// Edges between the given triples by the rule `x_1 = (b - a + x)/beta`.
fn graph_from_triples(parry: &ParryData, triples: Vec<(usize, Vec<i64>, usize)>) -> Result<BoundaryGraph> {
    let f = &parry.field;
    let tgt = digit_targets(parry)?;
    let index: HashMap<(usize, Vec<i64>, usize), usize> =
        triples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let m = f.max_digit();
    let mut edges = Vec::new();
    for (i, (v, x, w)) in triples.iter().enumerate() {
        for a in 0..=m {
            let Some(v1) = tgt[*v][a as usize] else { continue };
            for b in 0..=m {
                let Some(w1) = tgt[*w][b as usize] else { continue };
                let mut y = x.clone();
                y[0] += b - a;
                let x1 = match f.div_beta_i64(&y) {
                    Ok(z) => z,
                    Err(Error::NotIntegral) => continue,
                    Err(e) => return Err(e),
                };
                if let Some(&j) = index.get(&(v1, x1, w1)) {
                    edges.push(Edge { from: i, to: j, a, b });
                }
            }
        }
    }
    let nodes = triples
        .into_iter()
        .map(|(v, x, w)| GraphNode { v: Some(v), x: f.from_zvec(&x), w: Some(w) })
        .collect();
    let mut g = BoundaryGraph { field: f.clone(), v_values: parry.v.clone(), nodes, edges, rho_enclosure: None };
    g.sort_canonical();
    Ok(g)
}

/// The boundary graph: candidate triples, edges, pruned to the nodes with infinite paths.
pub fn build_boundary_graph(parry: &ParryData) -> Result<BoundaryGraph> {
    let triples = candidate_nodes(parry)?;
    let g = graph_from_triples(parry, triples)?;
    let mut g = g.prune();
    g.sort_canonical();
    Ok(g)
}

/// Collatz-Wielandt bounds for `rho(A)` over all strongly connected components.
pub fn spectral_radius_enclosure(graph: &BoundaryGraph, refine_steps: usize) -> (BigRational, BigRational) {
    let n = graph.nodes.len();
    let zero = BigRational::zero();
    if n == 0 {
        return (zero.clone(), zero);
    }
    let adj = graph.adjacency();
    let mut g: DiGraph<(), ()> = DiGraph::new();
    let ids: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for e in &graph.edges {
        g.add_edge(ids[e.from], ids[e.to], ());
    }
    let mut best = (zero.clone(), zero);
    for comp in tarjan_scc(&g) {
        let idx: Vec<usize> = comp.iter().map(|c| c.index()).collect();
        if idx.len() == 1 && adj[idx[0]][idx[0]] == 0 {
            continue;
        }
        let sub: Vec<Vec<u64>> = idx.iter().map(|&i| idx.iter().map(|&j| adj[i][j]).collect()).collect();
        let (lo, hi) = cw_bounds(&sub, refine_steps);
        if lo > best.0 {
            best.0 = lo;
        }
        if hi > best.1 {
            best.1 = hi;
        }
    }
    best
}

/// Bounds for an irreducible nonnegative matrix, computed on `A + I` (aperiodic) and
/// shifted back.
pub fn cw_bounds(a: &[Vec<u64>], refine_steps: usize) -> (BigRational, BigRational) {
    let n = a.len();
    // float power iteration for a good starting vector
    let mut x = vec![1.0_f64; n];
    for _ in 0..(200 + 20 * n).min(5000) {
        let mut y = x.clone();
        for i in 0..n {
            for j in 0..n {
                y[i] += a[i][j] as f64 * x[j];
            }
        }
        let s = y.iter().cloned().fold(0.0, f64::max);
        x = y.iter().map(|v| v / s).collect();
    }
    let scale = 2f64.powi(40);
    let mut xi: Vec<BigInt> = x
        .iter()
        .map(|v| BigInt::from((v * scale).max(0.0) as u64) + BigInt::one())
        .collect();
    let mut lo: Option<BigRational> = None;
    let mut hi: Option<BigRational> = None;
    for _ in 0..=refine_steps {
        let y: Vec<BigInt> = (0..n)
            .map(|i| {
                let mut s = xi[i].clone();
                for j in 0..n {
                    if a[i][j] != 0 {
                        s += BigInt::from(a[i][j]) * &xi[j];
                    }
                }
                s
            })
            .collect();
        let ratios: Vec<BigRational> = (0..n).map(|i| BigRational::new(y[i].clone(), xi[i].clone())).collect();
        let l = ratios.iter().min().unwrap().clone();
        let h = ratios.iter().max().unwrap().clone();
        if lo.as_ref().is_none_or(|c| &l > c) {
            lo = Some(l);
        }
        if hi.as_ref().is_none_or(|c| &h < c) {
            hi = Some(h);
        }
        // keep entries near 2^60 by ceil-rescaling
        let mx = y.iter().max().unwrap().bits();
        xi = if mx > 64 {
            let sh = mx - 60;
            y.iter()
                .map(|v| {
                    let q: BigInt = v >> sh;
                    q + BigInt::one()
                })
                .collect()
        } else {
            y
        };
    }
    let one = BigRational::one();
    (lo.unwrap() - &one, hi.unwrap() - one)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Tiling,
    NotTiling,
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct TilingDecision {
    pub verdict: Verdict,
    #[serde(serialize_with = "crate::report::ser_rat_pair")]
    pub rho: (BigRational, BigRational),
    #[serde(serialize_with = "crate::report::ser_rat_pair")]
    pub beta: (BigRational, BigRational),
    pub nodes: usize,
    pub edges: usize,
    /// Set when rho = beta was certified by a positive eigenvector in Q(beta).
    pub eigenvector_certificate: bool,
}

/// Tiling iff `rho < beta`.
pub fn decide_tiling(graph: &BoundaryGraph) -> TilingDecision {
    let f = &graph.field;
    let beta = f.beta_enclosure();
    let mut steps = 8;
    let mut rho = spectral_radius_enclosure(graph, steps);
    loop {
        if rho.1 < beta.0 {
            return TilingDecision {
                verdict: Verdict::Tiling,
                rho,
                beta,
                nodes: graph.len(),
                edges: graph.edges.len(),
                eigenvector_certificate: false,
            };
        }
        if rho.0 >= beta.1 {
            return TilingDecision {
                verdict: Verdict::NotTiling,
                rho,
                beta,
                nodes: graph.len(),
                edges: graph.edges.len(),
                eigenvector_certificate: false,
            };
        }
        if steps >= 512 {
            break;
        }
        steps *= 4;
        rho = spectral_radius_enclosure(graph, steps);
    }
    let cert = beta_eigenvector(graph);
    TilingDecision {
        verdict: if cert { Verdict::NotTiling } else { Verdict::Undecided },
        rho,
        beta,
        nodes: graph.len(),
        edges: graph.edges.len(),
        eigenvector_certificate: cert,
    }
}

/// Whether some strongly connected component has a positive eigenvector for beta, computed
/// exactly in Q(beta). Components above 60 nodes are skipped.
fn beta_eigenvector(graph: &BoundaryGraph) -> bool {
    let f = &graph.field;
    let adj = graph.adjacency();
    let n = graph.len();
    let mut g: DiGraph<(), ()> = DiGraph::new();
    let ids: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for e in &graph.edges {
        g.add_edge(ids[e.from], ids[e.to], ());
    }
    for comp in tarjan_scc(&g) {
        let idx: Vec<usize> = comp.iter().map(|c| c.index()).collect();
        let k = idx.len();
        if k > 60 || (k == 1 && adj[idx[0]][idx[0]] == 0) {
            continue;
        }
        let beta = f.beta();
        let mut m: Vec<Vec<FieldElement>> = idx
            .iter()
            .enumerate()
            .map(|(r, &i)| {
                idx.iter()
                    .enumerate()
                    .map(|(c, &j)| {
                        let e = f.from_int(adj[i][j] as i64);
                        if r == c {
                            &e - &beta
                        } else {
                            e
                        }
                    })
                    .collect()
            })
            .collect();
        // reduced row echelon form
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..k {
            let Some(p) = (row..k).find(|&r| !m[r][col].is_zero()) else { continue };
            m.swap(row, p);
            let inv = m[row][col].inv();
            m[row] = m[row].iter().map(|e| e.mul(&inv)).collect();
            for r in 0..k {
                if r != row && !m[r][col].is_zero() {
                    let fct = m[r][col].clone();
                    let prow = m[row].clone();
                    for (e, pe) in m[r].iter_mut().zip(&prow) {
                        *e = &*e - &fct.mul(pe);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        if pivots.len() != k - 1 {
            continue;
        }
        let free = (0..k).find(|c| !pivots.contains(c)).unwrap();
        let mut vec = vec![f.zero(); k];
        vec[free] = f.one();
        for (r, &pc) in pivots.iter().enumerate() {
            vec[pc] = m[r][free].neg();
        }
        let signs: Option<Vec<_>> = vec.iter().map(|e| e.sign().ok()).collect();
        if let Some(s) = signs {
            if s.iter().all(|o| o.is_gt()) || s.iter().all(|o| o.is_lt()) {
                return true;
            }
        }
    }
    false
}

/// The pruned boundary graph of `beta^2 = a beta + b`, from the explicit transition lists.
pub fn pruned_quadratic_graph(a: i64, b: i64) -> Result<BoundaryGraph> {
    if b < 1 || a < b {
        return Err(Error::BadParameters(format!("need a >= b >= 1, got a = {a}, b = {b}")));
    }
    let f = BetaField::new(&[BigInt::from(-b), BigInt::from(-a), BigInt::one()], crate::field::DEFAULT_BITS)?;
    let parry = parry_data(&f)?;
    // V = {0, v}, v = beta - a
    let v = f.from_i64_coeffs(&[-a, 1]);
    debug_assert_eq!(parry.v[1], v);
    let one = f.one();
    let (z, vv) = (0usize, 1usize);
    let xv = v.clone();
    let x1v = &one - &v;
    let xv1 = &v - &one;
    let xmv = v.neg();
    let mut nodes: Vec<(usize, FieldElement, usize)> = Vec::new();
    let mut edges: Vec<(usize, usize, i64, i64)> = Vec::new();
    let node = |t: (usize, FieldElement, usize), nodes: &mut Vec<(usize, FieldElement, usize)>| -> usize {
        if let Some(p) = nodes.iter().position(|n| n == &t) {
            p
        } else {
            nodes.push(t);
            nodes.len() - 1
        }
    };
    let mut add = |srcs: &[(usize, FieldElement, usize)],
                   dst: (usize, FieldElement, usize),
                   ds: std::ops::RangeInclusive<i64>,
                   shift: i64,
                   nodes: &mut Vec<(usize, FieldElement, usize)>| {
        let t = node(dst, nodes);
        for s in srcs {
            let si = node(s.clone(), nodes);
            for d in ds.clone() {
                edges.push((si, t, d, d + shift));
            }
        }
    };
    if 2 * b <= a {
        add(&[(vv, xv1.clone(), z)], (z, x1v.clone(), vv), 0..=b - 1, a - b + 1, &mut nodes);
        add(&[(z, x1v.clone(), vv)], (vv, xv1.clone(), z), a - b + 1..=a, -a + b - 1, &mut nodes);
        add(&[(z, xv.clone(), vv), (vv, xv.clone(), vv)], (z, x1v.clone(), vv), 0..=b - 1, a - b, &mut nodes);
        add(&[(vv, xmv.clone(), z), (vv, xmv.clone(), vv)], (vv, xv1.clone(), z), a - b..=a - 1, -a + b, &mut nodes);
    } else {
        let s1 = [(vv, xv1.clone(), z), (z, xv1.clone(), z)];
        add(&s1, (z, x1v.clone(), z), 0..=2 * b - a - 2, a - b + 1, &mut nodes);
        add(&s1, (z, x1v.clone(), vv), 2 * b - a - 1..=b - 1, a - b + 1, &mut nodes);
        let s2 = [(z, x1v.clone(), vv), (z, x1v.clone(), z)];
        add(&s2, (z, xv1.clone(), z), a - b + 1..=b - 1, -a + b - 1, &mut nodes);
        add(&s2, (vv, xv1.clone(), z), b..=a, -a + b - 1, &mut nodes);
        add(&[(z, xv.clone(), vv)], (z, x1v.clone(), z), 0..=2 * b - a - 1, a - b, &mut nodes);
        add(&[(z, xv.clone(), vv)], (z, x1v.clone(), vv), 2 * b - a..=b - 1, a - b, &mut nodes);
        add(&[(vv, xmv.clone(), z)], (z, xv1.clone(), z), a - b..=b - 1, -a + b, &mut nodes);
        add(&[(vv, xmv.clone(), z)], (vv, xv1.clone(), z), b..=a - 1, -a + b, &mut nodes);
    }
    let mut g = BoundaryGraph {
        field: f.clone(),
        v_values: parry.v.clone(),
        nodes: nodes.into_iter().map(|(v, x, w)| GraphNode { v: Some(v), x, w: Some(w) }).collect(),
        edges: edges.into_iter().map(|(from, to, a, b)| Edge { from, to, a, b }).collect(),
        rho_enclosure: None,
    };
    g.sort_canonical();
    Ok(g)
}

/// DOT text with nodes in canonical order and one line per edge.
pub fn export_dot(graph: &BoundaryGraph) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "digraph boundary {{");
    for i in 0..graph.len() {
        let _ = writeln!(s, "  n{} [label=\"{}\"];", i, graph.node_label(i));
    }
    for e in &graph.edges {
        let _ = writeln!(s, "  n{} -> n{} [label=\"({},{})\"];", e.from, e.to, e.a, e.b);
    }
    s.push_str("}\n");
    s
}

/// Edge multiset `(from, to, a, b)` read back from `export_dot` output.
pub fn parse_dot_edges(dot: &str) -> Result<BTreeMap<(usize, usize, i64, i64), usize>> {
    let mut out = BTreeMap::new();
    for line in dot.lines() {
        let line = line.trim();
        let Some((lhs, rest)) = line.split_once(" -> ") else { continue };
        let bad = || Error::Parse(format!("bad edge line '{line}'"));
        let from: usize = lhs.trim_start_matches('n').parse().map_err(|_| bad())?;
        let (to_s, lab) = rest.split_once(' ').ok_or_else(bad)?;
        let to: usize = to_s.trim_start_matches('n').parse().map_err(|_| bad())?;
        let inner = lab
            .split_once("(")
            .and_then(|(_, r)| r.split_once(")"))
            .map(|(l, _)| l)
            .ok_or_else(bad)?;
        let (a, b) = inner.split_once(',').ok_or_else(bad)?;
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        *out.entry((from, to, a, b)).or_insert(0) += 1;
    }
    Ok(out)
}

/// Rational enclosure rendered for humans.
pub fn format_enclosure(e: &(BigRational, BigRational), digits: usize) -> String {
    format!("[{}, {}]", rat::decimal(&e.0, digits), rat::decimal_up(&e.1, digits))
}
