use serde_json::{json, Value};

use betatile::boundary::{build_boundary_graph, decide_tiling, export_dot, BoundaryGraph, TilingDecision, Verdict};
use betatile::dynamics::{parry_data, t_preimages, ParryData};
use betatile::gamma::{gamma_lower_bound_thm5, gamma_quadratic, gamma_scan, GammaResult};
use betatile::natext::{covering_degree_estimate, domain_slices, nat_ext_contains};
use betatile::periodicity::{check_w, exclusive_point, is_purely_periodic, pur_set_integral};
use betatile::report::{Enclosure, ExactElement};
use betatile::tiles::{
    hausdorff_bound, hausdorff_defect, integral_cloud, lattice_translates, periodic_patch, rauzy_cloud, TileCloud,
};
use betatile::{make_beta, BetaField, Error, FieldElement, Result};

use crate::args::{Cli, Command, GammaMethodArg, KindArg, Target, TilesArgs};
use crate::config::RunConfig;
use crate::render::{bands_svg, points_svg, project, slice_bands, Layer};

/// What a command produced.
#[derive(Debug)]
pub struct Outcome {
    pub json: Value,
    pub svg: Option<String>,
    pub dot: Option<String>,
    pub exit_code: i32,
}

impl Outcome {
    fn json(json: Value) -> Self {
        Outcome { json, svg: None, dot: None, exit_code: 0 }
    }
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Tiling => 0,
        Verdict::Undecided => 2,
        Verdict::NotTiling => 3,
    }
}

/// Machine-readable error document.
pub fn error_json(config: &RunConfig, e: &Error) -> Value {
    json!({ "config": config, "error": { "code": e.code(), "message": e.to_string() } })
}

fn el(x: &FieldElement) -> Value {
    serde_json::to_value(ExactElement::from(x)).expect("element serializes")
}

fn els(xs: &[FieldElement]) -> Value {
    Value::Array(xs.iter().map(el).collect())
}

/// `p/q` with its float value.
fn ratio(p: usize, q: usize) -> Value {
    json!({ "exact": format!("{p}/{q}"), "approx": if q == 0 { 0.0 } else { p as f64 / q as f64 } })
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let config = RunConfig::from_cli(cli);
    let f = make_beta(&cli.global.poly, cli.global.bits)?;
    let k = cli.global.level;
    let mut out = match &cli.command {
        Command::Analyze { max_den } => analyze(&f, *max_den, &config)?,
        Command::Parry => Outcome::json(parry_json(&parry_data(&f)?)),
        Command::Tiles(t) => tiles(&f, k, t, &config, cli.global.svg.is_some())?,
        Command::BoundaryGraph => {
            let parry = parry_data(&f)?;
            let g = build_boundary_graph(&parry)?;
            let d = decide_tiling(&g);
            let mut o = Outcome::json(graph_json(&g, &d));
            o.dot = Some(export_dot(&g));
            o.exit_code = exit_code(d.verdict);
            o
        }
        Command::Gamma { method, max_den } => Outcome::json(gamma(&f, *method, *max_den, k)?),
        Command::Purper { x, y_depth, n_cap } => Outcome::json(purper(&f, x.as_deref(), *y_depth, *n_cap)?),
        Command::Natext { samples, window, seed } => {
            let parry = parry_data(&f)?;
            let r = covering_degree_estimate(&parry, k, *samples, *window, *seed)?;
            let hist = |h: &std::collections::BTreeMap<usize, usize>| -> Value {
                Value::Array(h.iter().map(|(c, n)| json!({ "hits": c, "samples": n })).collect())
            };
            let one = |h: &std::collections::BTreeMap<usize, usize>| *h.get(&1).unwrap_or(&0);
            let j = json!({
                "level": r.level,
                "samples": r.samples,
                "in_stripe": r.in_stripe,
                "out_of_stripe": r.out_of_stripe,
                "raw_histogram": hist(&r.raw_histogram),
                "refined_histogram": hist(&r.refined_histogram),
                "refine_depth": r.refine_depth,
                "modal_count": r.modal_count,
                "fraction_one": ratio(one(&r.refined_histogram), r.in_stripe),
                "raw_fraction_one": ratio(one(&r.raw_histogram), r.in_stripe),
                "note": "diagnostic estimate from outer boxes, not a certificate",
            });
            let mut o = Outcome::json(j);
            if cli.global.svg.is_some() {
                o.svg = Some(natext_svg(&parry, k, &config)?);
            }
            o
        }
    };
    if let Value::Object(m) = &mut out.json {
        m.insert("config".into(), serde_json::to_value(&config).expect("config serializes"));
    }
    Ok(out)
}

fn field_json(f: &BetaField) -> Value {
    let (lo, hi) = f.beta_enclosure();
    let places: Vec<Value> = f
        .places()
        .iter()
        .map(|p| json!({ "complex": p.complex, "approx": [p.approx.re, p.approx.im], "modulus": p.approx.norm() }))
        .collect();
    json!({
        "polynomial": f.pretty(),
        "degree": f.degree(),
        "pisot": true,
        "beta": Enclosure::new(&lo, &hi),
        "norm": f.norm().to_string(),
        "unit": f.is_unit(),
        "max_digit": f.max_digit(),
        "conjugates": places,
        "max_conjugate_modulus_upper": betatile::rat::format_rat(&f.max_conj_abs_upper()),
    })
}

pub fn parry_json(p: &ParryData) -> Value {
    json!({
        "field": field_json(&p.field),
        "expansion_of_one": p.expansion_of_one.render(),
        "quasi_greedy": p.quasi_greedy.render(),
        "v": els(&p.v),
        "v_hat": els(&p.v_hat),
        "successor": p.succ,
        "lattice_basis": els(&p.lattice),
        "lattice_rank": p.lattice_rank(),
        "qm": p.qm,
    })
}

fn graph_json(g: &BoundaryGraph, d: &TilingDecision) -> Value {
    let nodes: Vec<Value> = (0..g.len())
        .map(|i| {
            let n = &g.nodes[i];
            json!({ "id": i, "v": n.v, "x": el(&n.x), "w": n.w, "label": g.node_label(i) })
        })
        .collect();
    json!({
        "nodes": nodes,
        "edges": g.edges,
        "decision": d,
    })
}

/// `β³ = tβ² + (t+1)β + 1`.
fn cubic_family(f: &BetaField) -> Option<i64> {
    use num_traits::ToPrimitive;
    let p = f.min_poly();
    if p.len() != 4 {
        return None;
    }
    let c: Vec<i64> = p.iter().map(|x| x.to_i64()).collect::<Option<_>>()?;
    let t = -c[2];
    (c[0] == -1 && c[1] == -(t + 1) && t >= 0).then_some(t)
}

/// `x² - a x - b` with `a >= b >= 1`.
fn quadratic_ab(f: &BetaField) -> Option<(i64, i64)> {
    use num_traits::ToPrimitive;
    let p = f.min_poly();
    if p.len() != 3 {
        return None;
    }
    let (b, a) = (-p[0].to_i64()?, -p[1].to_i64()?);
    (b >= 1 && a >= b).then_some((a, b))
}

fn gamma_default(f: &BetaField, max_den: u64) -> Result<GammaResult> {
    match quadratic_ab(f) {
        Some((a, b)) => gamma_quadratic(a, b),
        None => gamma_scan(f, max_den),
    }
}

fn analyze(f: &BetaField, max_den: u64, _config: &RunConfig) -> Result<Outcome> {
    let parry = parry_data(f)?;
    let mut notes = Vec::new();
    if let Some(t) = cubic_family(f) {
        notes.push(format!(
            "beta^3 = {t} beta^2 + {} beta + 1: V^ lies in L, so L = Z[beta] and (QM) fails",
            t + 1
        ));
    }
    let g = build_boundary_graph(&parry)?;
    let d = decide_tiling(&g);
    let p = pur_set_integral(f)?;
    let w = check_w(&p, 10, 60)?;
    let z = if w.holds() { Some(exclusive_point(&parry, &p, &w)?) } else { None };
    let gamma = gamma_default(f, max_den)?;
    let j = json!({
        "parry": parry_json(&parry),
        "qm": parry.qm,
        "boundary_graph": { "nodes": g.len(), "edges": g.edges.len() },
        "rho": Enclosure::new(&d.rho.0, &d.rho.1),
        "decision": d,
        "verdict": d.verdict,
        "p_set": els(&p),
        "w": w,
        "exclusive_point": z,
        "gamma": gamma,
        "notes": notes,
    });
    let mut o = Outcome::json(j);
    o.dot = Some(export_dot(&g));
    o.exit_code = exit_code(d.verdict);
    Ok(o)
}

fn gamma(f: &BetaField, method: GammaMethodArg, max_den: u64, k: usize) -> Result<Value> {
    Ok(match method {
        GammaMethodArg::Quadratic => {
            let (a, b) = quadratic_ab(f).ok_or_else(|| {
                Error::BadParameters("the closed form needs beta^2 = a beta + b with a >= b >= 1".into())
            })?;
            serde_json::to_value(gamma_quadratic(a, b)?).expect("serializes")
        }
        GammaMethodArg::Scan => serde_json::to_value(gamma_scan(f, max_den)?).expect("serializes"),
        GammaMethodArg::Thm5 => {
            let parry = parry_data(f)?;
            json!({ "method": "tile-cover", "bound": gamma_lower_bound_thm5(&parry, k)? })
        }
    })
}

fn purper(f: &BetaField, x: Option<&str>, y_depth: usize, n_cap: usize) -> Result<Value> {
    let parry = parry_data(f)?;
    let point = match x {
        Some(s) => {
            let x = f.parse_element(s)?;
            let r = is_purely_periodic(&x)?;
            Some(json!({ "report": r, "in_natural_extension": nat_ext_contains(&x) }))
        }
        None => None,
    };
    let p = pur_set_integral(f)?;
    let w = check_w(&p, y_depth, n_cap)?;
    let z = if w.holds() { Some(exclusive_point(&parry, &p, &w)?) } else { None };
    Ok(json!({ "point": point, "p_set": els(&p), "w": w, "w_holds": w.holds(), "exclusive_point": z }))
}

/// `T^{-n}(0)`.
fn preimages(f: &BetaField, n: usize) -> Result<Vec<FieldElement>> {
    let mut cur = vec![f.zero()];
    for _ in 0..n {
        let mut next = Vec::new();
        for y in &cur {
            next.extend(t_preimages(y, false)?);
        }
        cur = next;
    }
    betatile::dynamics::sort_elements(&mut cur)?;
    Ok(cur)
}

fn cloud_points_json(c: &TileCloud, window: Option<(f64, f64)>) -> Value {
    let addrs = c.addresses.as_ref();
    let pts: Vec<Value> = (0..c.len())
        .filter(|&i| window.map_or(true, |(lo, hi)| (lo..=hi).contains(&c.arch[i][0])))
        .map(|i| {
            json!({
                "point": el(&c.point(i)),
                "arch": c.arch[i],
                "address": addrs.map(|a| a[i].clone()),
            })
        })
        .collect();
    Value::Array(pts)
}

fn tiles(f: &BetaField, k: usize, t: &TilesArgs, config: &RunConfig, want_svg: bool) -> Result<Outcome> {
    let x = f.parse_element(&t.x)?;
    let depth = t.addr_depth.unwrap_or(k);
    let make = |lvl: usize| -> Result<TileCloud> {
        let c = match t.kind {
            KindArg::Rauzy => rauzy_cloud(&x, lvl)?,
            KindArg::Integral => integral_cloud(&x, lvl)?,
        };
        if c.addresses.is_some() && depth != lvl {
            c.with_addr_depth(depth)
        } else {
            Ok(c)
        }
    };
    let cloud = make(k)?;
    let hausdorff = if k > 0 { Some(hausdorff_defect(&make(k - 1)?, &cloud)?) } else { None };
    let j = json!({
        "base": el(&x),
        "kind": cloud.kind,
        "level": k,
        "count": cloud.len(),
        "hausdorff_bound": betatile::rat::format_rat(&hausdorff_bound(f, k)),
        "hausdorff": hausdorff,
        "points": cloud_points_json(&cloud, t.window),
    });
    let mut o = Outcome::json(j);
    if want_svg {
        o.svg = Some(render_target(f, k, t, config)?);
    }
    Ok(o)
}

fn axes(f: &BetaField) -> (&'static str, &'static str) {
    if f.arch_dim() >= 2 {
        ("first archimedean coordinate", "second archimedean coordinate")
    } else if f.is_unit() {
        ("conjugate", "tile")
    } else {
        ("conjugate", "address sum d_j |N|^(-j-1)")
    }
}

/// SVG for one of the figure targets.
pub fn render_target(f: &BetaField, k: usize, t: &TilesArgs, config: &RunConfig) -> Result<String> {
    let parry = parry_data(f)?;
    let depth = t.addr_depth.unwrap_or(k);
    let radius = betatile::tiles::tail_radius(f, k);
    let header = config.header();
    let layers = |clouds: Vec<(String, TileCloud)>| -> Result<Vec<Layer>> {
        clouds
            .into_iter()
            .enumerate()
            .map(|(i, (label, c))| Ok(Layer { label, points: project(&c, depth, i as f64)? }))
            .collect()
    };
    match t.target {
        Target::Aper => {
            let ys = preimages(f, t.patch_depth)?;
            let clouds = ys
                .iter()
                .map(|y| Ok((format!("R({})", y.pretty()), rauzy_cloud(y, k)?)))
                .collect::<Result<Vec<_>>>()?;
            let title = format!("beta^-{} R(0) as a patch of the aperiodic tiling, {}", t.patch_depth, f.pretty());
            Ok(points_svg(&header, &title, axes(f), &layers(clouds)?, radius))
        }
        Target::Int => {
            let ys: Vec<FieldElement> = preimages(f, t.patch_depth)?.into_iter().filter(|y| y.is_integral()).collect();
            let clouds = ys
                .iter()
                .map(|y| Ok((format!("S({})", y.pretty()), integral_cloud(y, k)?)))
                .collect::<Result<Vec<_>>>()?;
            let title = format!("integral tiles S(y), y in T^-{}(0) ∩ Z[beta], {}", t.patch_depth, f.pretty());
            Ok(points_svg(&header, &title, axes(f), &layers(clouds)?, radius))
        }
        Target::Per => {
            let tr = lattice_translates(&parry, t.translates);
            let patch = periodic_patch(&parry, &tr, k, false)?;
            let clouds = patch
                .translates
                .iter()
                .zip(patch.clouds)
                .map(|(t, c)| (format!("R(0) + {}", t.pretty()), c))
                .collect();
            let title = format!("periodic translates delta'(L) + R(0), {}", f.pretty());
            Ok(points_svg(&header, &title, axes(f), &layers(clouds)?, radius))
        }
        Target::Natext => natext_svg(&parry, k, config),
    }
}

fn natext_svg(parry: &ParryData, k: usize, config: &RunConfig) -> Result<String> {
    let slices = domain_slices(parry, k)?;
    let title = format!("natural extension domain, {}", parry.field.pretty());
    let r = betatile::tiles::tail_radius(&parry.field, k);
    Ok(bands_svg(&config.header(), &title, ("x in [0,1)", "first archimedean coordinate"), &slice_bands(&slices), r))
}
