//! Deterministic SVG output.

use std::fmt::Write;

use betatile::field::{finite_address_i64, BetaField};
use betatile::natext::DomainSlice;
use betatile::tiles::TileCloud;
use betatile::Result;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 20.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// Points of one tile in the plane, with a label.
pub struct Layer {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Horizontal segments `[x0, x1]` at height `y`, one group per slice.
pub struct Bands {
    pub label: String,
    pub x: (f64, f64),
    pub ys: Vec<f64>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace("--", "- -")
}

struct Frame {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
}

impl Frame {
    fn new(xs: impl Iterator<Item = (f64, f64)>, pad: f64) -> Frame {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in xs {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
        }
        let (x0, x1, y0, y1) = (x0 - pad, x1 + pad, y0 - pad, y1 + pad);
        let sx = (WIDTH - 2.0 * MARGIN) / (x1 - x0).max(1e-12);
        let sy = (HEIGHT - 2.0 * MARGIN) / (y1 - y0).max(1e-12);
        Frame { x0, y0: y1, sx, sy }
    }
    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (MARGIN + (x - self.x0) * self.sx, MARGIN + (self.y0 - y) * self.sy)
    }
}

fn open(header: &str, title: &str, axes: (&str, &str)) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(s, "<!-- {} -->", esc(header));
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, "<title>{}</title>", esc(title));
    let _ = writeln!(s, r#"<desc>horizontal: {}; vertical: {}</desc>"#, esc(axes.0), esc(axes.1));
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    s
}

/// Each point is a disc whose radius is `radius` in data units (at least half a pixel).
pub fn points_svg(header: &str, title: &str, axes: (&str, &str), layers: &[Layer], radius: f64) -> String {
    let frame = Frame::new(layers.iter().flat_map(|l| l.points.iter().copied()), radius);
    let r = (radius * frame.sx.min(frame.sy)).max(0.5);
    let mut s = open(header, title, axes);
    for (i, l) in layers.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<g id="tile{i}" fill="{}" fill-opacity="0.6"><title>{}</title>"#,
            PALETTE[i % PALETTE.len()],
            esc(&l.label)
        );
        for &p in &l.points {
            let (x, y) = frame.map(p);
            let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r:.3}"/>"#);
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

pub fn bands_svg(header: &str, title: &str, axes: (&str, &str), bands: &[Bands], thickness: f64) -> String {
    let frame = Frame::new(
        bands.iter().flat_map(|b| b.ys.iter().flat_map(move |&y| [(b.x.0, y), (b.x.1, y)])),
        thickness,
    );
    let w = (thickness * frame.sy).max(0.5);
    let mut s = open(header, title, axes);
    for (i, b) in bands.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<g id="slice{i}" stroke="{}" stroke-width="{w:.3}" stroke-opacity="0.6"><title>{}</title>"#,
            PALETTE[i % PALETTE.len()],
            esc(&b.label)
        );
        for &y in &b.ys {
            let (x0, yy) = frame.map((b.x.0, y));
            let (x1, _) = frame.map((b.x.1, y));
            let _ = writeln!(s, r#"<line x1="{x0:.3}" y1="{yy:.3}" x2="{x1:.3}" y2="{yy:.3}"/>"#);
        }
        let _ = writeln!(s, "</g>");
    }
    s.push_str("</svg>\n");
    s
}

/// Real encoding `Σ d_j |N|^{-j-1}` of the finite-place coordinate of an integral element,
/// extended to `beta^{-e} (integral)` by shifting the digit string.
pub fn address_axis(f: &BetaField, v: &[i64], shift: usize, depth: usize) -> Result<f64> {
    let digits = finite_address_i64(f, v, depth + shift)?;
    let b = f.abs_norm() as f64;
    let mut s = 0.0;
    for (j, d) in digits.iter().enumerate() {
        s += *d as f64 * b.powi(shift as i32 - j as i32 - 1);
    }
    Ok(s)
}

/// Planar projection of a cloud: two archimedean coordinates, or the real conjugate against
/// the address axis for non-unit quadratics, or against `lane` for unit quadratics.
pub fn project(cloud: &TileCloud, depth: usize, lane: f64) -> Result<Vec<(f64, f64)>> {
    let f = &cloud.field;
    if f.arch_dim() >= 2 {
        return Ok(cloud.arch.iter().map(|a| (a[0], a[1])).collect());
    }
    if f.is_unit() {
        return Ok(cloud.arch.iter().map(|a| (a[0], lane)).collect());
    }
    // beta^e * base is integral
    let mut e = 0;
    let mut scaled = cloud.base.clone();
    while !scaled.is_integral() {
        scaled = scaled.mul_beta();
        e += 1;
        if e > 64 {
            return Err(betatile::Error::NotBetaRational);
        }
    }
    let b = scaled.to_i64_vec().ok_or(betatile::Error::Overflow)?;
    let mut out = Vec::with_capacity(cloud.len());
    for (i, w) in cloud.offsets.iter().enumerate() {
        let t: Vec<i64> = w.iter().zip(&cloud.shift).map(|(a, s)| a + s).collect();
        // beta^e * t
        let mut bt = t.clone();
        for _ in 0..e {
            bt = f.mul_beta_i64(&bt)?;
        }
        let v: Vec<i64> = bt.iter().zip(&b).map(|(x, y)| x + y).collect();
        out.push((cloud.arch[i][0], address_axis(f, &v, e, depth)?));
    }
    Ok(out)
}

/// Domain slices as bands over `[v, v^)` at the heights of the first archimedean coordinate.
pub fn slice_bands(slices: &[DomainSlice]) -> Vec<Bands> {
    slices
        .iter()
        .map(|s| Bands {
            label: format!("[{}, {})", s.v.pretty(), s.v_hat.pretty()),
            x: s.interval,
            ys: s.points.iter().map(|p| p[0]).collect(),
        })
        .collect()
}
