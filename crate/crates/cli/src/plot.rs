//! Collision and resonance loci: SVG plots, JSON listings and CSV grid scans.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;

use twistorlab::preferred_section::{
    collision_at, collision_locus, resonance_points, resonates_at, simultaneous_degeneration, standard_cover,
    ChartDisk, CollisionLocus, Region, Resonance, SurfaceData,
};
use twistorlab::scalar::serde_complex;
use twistorlab::{Complex, Complex64, KmsPair, Scalar};

use crate::{Failure, Format, Outcome, Output};

pub struct Request<'a> {
    pub window: &'a str,
    pub grid: usize,
    pub format: Format,
}

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Clone, Copy)]
struct Window {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Window {
    fn contains(&self, z: Complex64) -> bool {
        (self.x0..=self.x1).contains(&z.re) && (self.y0..=self.y1).contains(&z.im)
    }

    fn px(&self, z: Complex64) -> (f64, f64) {
        let x = MARGIN + (z.re - self.x0) / (self.x1 - self.x0) * SIZE;
        let y = MARGIN + (self.y1 - z.im) / (self.y1 - self.y0) * SIZE;
        (x, y)
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x0, self.y1),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x1, self.y1),
        ]
    }
}

#[derive(Serialize)]
struct Segment {
    k: i64,
    #[serde(with = "serde_complex")]
    from: Complex64,
    #[serde(with = "serde_complex")]
    to: Complex64,
}

#[derive(Serialize)]
struct Point {
    k: i64,
    #[serde(with = "serde_complex")]
    at: Complex64,
}

#[derive(Serialize)]
struct Loci {
    puncture: String,
    lines: Vec<Segment>,
    points: Vec<Point>,
}

fn degenerate(puncture: &str, what: &str, k: i64) -> Failure {
    Failure::Domain {
        message: format!("{what} locus is everything at puncture {puncture:?} for k = {k}"),
        witness: json!({ "error": format!("{what}-everywhere"), "puncture": puncture, "k": k }),
    }
}

/// Clips `{z : 2 Re(z · conj n) = c}` to the window.
fn clip(n: Complex64, c: f64, w: &Window) -> Option<(Complex64, Complex64)> {
    let (a, b) = (2.0 * n.re, 2.0 * n.im);
    let norm = a * a + b * b;
    let p = Complex64::new(a * c / norm, b * c / norm);
    let d = Complex64::new(-b, a);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (p0, d0, min, max) in [(p.re, d.re, w.x0, w.x1), (p.im, d.im, w.y0, w.y1)] {
        if d0 == 0.0 {
            if p0 < min || p0 > max {
                return None;
            }
            continue;
        }
        let (t0, t1) = ((min - p0) / d0, (max - p0) / d0);
        lo = lo.max(t0.min(t1));
        hi = hi.min(t0.max(t1));
    }
    (lo <= hi).then(|| (p + d * lo, p + d * hi))
}

/// Lines for every `k` whose collision line meets the window, and the
/// resonance points of those same `k` inside it.
fn loci<T: Scalar>(name: &str, pair: &KmsPair<T>, w: &Window) -> Result<Loci, Failure> {
    let d = pair.delta().to_f64();
    let mut out = Loci { puncture: name.to_string(), lines: Vec::new(), points: Vec::new() };
    let values: Vec<f64> = w.corners().iter().map(|z| d.a + 2.0 * (z * d.alpha.conj()).re).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min).ceil() as i64;
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max).floor() as i64;
    let nearest = d.a.round() as i64;
    if let CollisionLocus::Everywhere = collision_locus(pair, nearest) {
        return Err(degenerate(name, "collision", nearest));
    }
    for k in lo..=hi {
        let CollisionLocus::Line { normal, offset } = collision_locus(pair, k) else {
            continue;
        };
        let normal = Complex64::new(normal.re.to_f64(), normal.im.to_f64());
        if let Some((from, to)) = clip(normal, offset.to_f64(), w) {
            out.lines.push(Segment { k, from, to });
        }
        match resonance_points(pair, k) {
            Resonance::Identically => return Err(degenerate(name, "resonance", k)),
            Resonance::Points { points } => {
                out.points.extend(points.into_iter().filter(|z| w.contains(*z)).map(|at| Point { k, at }));
            }
        }
    }
    Ok(out)
}

fn parse_window<T: Scalar>(text: &str) -> Result<[T; 4], Failure> {
    let parts: Vec<&str> = text.split(',').collect();
    let [x0, x1, y0, y1] = parts[..] else {
        return Err(Failure::Input(format!("expected \"xmin,xmax,ymin,ymax\", got {text:?}")));
    };
    let v = [T::parse(x0)?, T::parse(x1)?, T::parse(y0)?, T::parse(y1)?];
    if !(v[0].to_f64() < v[1].to_f64() && v[2].to_f64() < v[3].to_f64()) {
        return Err(Failure::Input(format!("window {text:?} is empty")));
    }
    Ok(v)
}

fn grid_scan<T: Scalar>(data: &SurfaceData<T>, bounds: &[T; 4], n: usize) -> Result<String, Failure> {
    if n < 2 {
        return Err(Failure::Input("--grid needs at least 2 points".into()));
    }
    let steps = T::from_i64(n as i64 - 1);
    let axis = |lo: &T, hi: &T| -> Vec<T> {
        (0..n).map(|i| lo.clone() + (hi.clone() - lo.clone()) * T::from_i64(i as i64) / steps.clone()).collect()
    };
    let (xs, ys) = (axis(&bounds[0], &bounds[1]), axis(&bounds[2], &bounds[3]));
    let mut out = String::from("puncture,re,im,collision_k,resonant,simultaneous\n");
    for (name, pair) in &data.kms {
        let name =
            if name.contains([',', '"', '\n']) { format!("\"{}\"", name.replace('"', "\"\"")) } else { name.clone() };
        for x in &xs {
            for y in &ys {
                let z = Complex::new(x.clone(), y.clone());
                let k = collision_at(pair, &z);
                let resonant = k.is_some_and(|k| resonates_at(pair, k, &z));
                let both = simultaneous_degeneration(pair, &z).is_some();
                let k = k.map(|k| k.to_string()).unwrap_or_default();
                let _ = writeln!(out, "{name},{},{},{k},{resonant},{both}", x.to_f64(), y.to_f64());
            }
        }
    }
    Ok(out)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn svg(loci: &[Loci], disks: &[ChartDisk], w: &Window) -> String {
    let full = SIZE + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{full:.0}" height="{full:.0}" viewBox="0 0 {full:.0} {full:.0}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN:.3}" y="{MARGIN:.3}" width="{SIZE:.3}" height="{SIZE:.3}" fill="white" stroke="black"/>"#
    );
    // axes pinned to the frame when 0 is outside the window
    let (ax, ay) = w.px(Complex64::new(0.0f64.clamp(w.x0, w.x1), 0.0f64.clamp(w.y0, w.y1)));
    let _ = writeln!(s, r##"<g id="axes" stroke="#888" stroke-width="1">"##);
    let _ = writeln!(s, r#"<line x1="{MARGIN:.3}" y1="{ay:.3}" x2="{:.3}" y2="{ay:.3}"/>"#, MARGIN + SIZE);
    let _ = writeln!(s, r#"<line x1="{ax:.3}" y1="{MARGIN:.3}" x2="{ax:.3}" y2="{:.3}"/>"#, MARGIN + SIZE);
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g id="collision" stroke-width="1.5">"#);
    for l in loci {
        let name = escape(&l.puncture);
        for seg in &l.lines {
            let ((x1, y1), (x2, y2)) = (w.px(seg.from), w.px(seg.to));
            let color = PALETTE[seg.k.rem_euclid(PALETTE.len() as i64) as usize];
            let _ = writeln!(
                s,
                r#"<line class="{} k{}" x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="{color}"/>"#,
                name, seg.k
            );
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g id="resonance" fill="black">"#);
    for l in loci {
        let name = escape(&l.puncture);
        for p in &l.points {
            let (x, y) = w.px(p.at);
            let _ = writeln!(s, r#"<circle class="{name} k{}" cx="{x:.3}" cy="{y:.3}" r="3"/>"#, p.k);
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r##"<g id="disks" fill="none" stroke="#555" stroke-width="0.75">"##);
    let scale = SIZE / (w.x1 - w.x0);
    for d in disks {
        // a disk whose boundary passes through λ = 0 is a half-plane and is not drawn
        let (center, radius, dashed) = match d.zero_chart_region() {
            Region::Disk { center, radius } => (center, radius, false),
            Region::Exterior { center, radius } => (center, radius, true),
            Region::Unbounded => continue,
        };
        let (x, y) = w.px(center);
        let dash = if dashed { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(s, r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}"{dash}/>"#, radius * scale);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

pub fn run<T: Scalar>(text: &str, req: &Request, mut disks: Vec<ChartDisk>, standard: bool) -> Outcome {
    let data: SurfaceData<T> = serde_json::from_str(text).map_err(|e| Failure::Input(e.to_string()))?;
    let bounds: [T; 4] = parse_window(req.window)?;
    if req.format == Format::Csv {
        return Ok(Output::Text(grid_scan(&data, &bounds, req.grid)?));
    }
    let [x0, x1, y0, y1] = bounds.map(|v| v.to_f64());
    let w = Window { x0, x1, y0, y1 };
    let loci = data.kms.iter().map(|(y, pair)| loci(y, pair, &w)).collect::<Result<Vec<_>, _>>()?;
    if standard {
        disks = standard_cover(&data)?;
    }
    match req.format {
        Format::Svg => Ok(Output::Text(svg(&loci, &disks, &w))),
        _ => Ok(Output::Json(json!({ "window": [x0, x1, y0, y1], "loci": loci, "disks": disks }))),
    }
}
