//! SVG rendering of residual maps, PIT histograms, quantile plots and
//! power curves.
//!
//! Every region of a residual map is exactly one `<polygon>` or `<rect>`
//! element; legends and axes use lines, paths and text only.

use std::fmt::Write as _;

use vorres_core::geometry::{PixelGrid, Point, VoronoiDiagram, Window};
use vorres_core::inference::{Partition, PitHistogram};
use vorres_core::residuals::{residual_color_scale, QuantilePlot, ResidualRecord};

use crate::error::{Error, Result};
use crate::formats::{PolygonRecord, PowerLine};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
/// Residual colours saturate at |z| = 3.
pub const Z_LIMIT: f64 = 3.0;

/// Symmetric red–white–blue ramp: negative z (overprediction) red,
/// positive z (underprediction) blue, clamped at ±3.
pub fn ramp_color(z: f64) -> String {
    let t = if z.is_nan() { 0.0 } else { (z / Z_LIMIT).clamp(-1.0, 1.0) };
    let fade = (255.0 * (1.0 - t.abs())).round() as u8;
    if t < 0.0 {
        format!("#ff{fade:02x}{fade:02x}")
    } else {
        format!("#{fade:02x}{fade:02x}ff")
    }
}

/// A region of a residual map.
#[derive(Debug, Clone, PartialEq)]
pub enum MapRegion {
    Polygon(Vec<Point>),
    Rect(Window),
}

pub fn regions_from_diagram(diagram: &VoronoiDiagram) -> Vec<MapRegion> {
    diagram
        .cells
        .iter()
        .map(|c| MapRegion::Polygon(c.vertices.clone()))
        .collect()
}

pub fn regions_from_polygons(polygons: &[PolygonRecord]) -> Vec<MapRegion> {
    polygons
        .iter()
        .map(|p| MapRegion::Polygon(p.vertices.clone()))
        .collect()
}

pub fn regions_from_grid(grid: &PixelGrid) -> Vec<MapRegion> {
    (0..grid.len()).map(|i| MapRegion::Rect(grid.pixel(i))).collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn open(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">
<title>{}</title>
<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        escape(title),
        width / 2.0,
        escape(title)
    );
}

fn close(out: &mut String) {
    out.push_str("</svg>\n");
}

/// Maps data coordinates to the plotting area.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64), left: f64, right: f64, top: f64, bottom: f64) -> Self {
        let widen = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        let (x0, x1) = widen(x);
        let (y0, y1) = widen(y);
        Self {
            x0,
            x1,
            y0,
            y1,
            left,
            right,
            top,
            bottom,
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * (self.right - self.left)
    }

    fn py(&self, y: f64) -> f64 {
        self.bottom - (y - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str, xticks: &[f64], yticks: &[f64]) {
        let _ = writeln!(
            out,
            r#"<path d="M{:.2},{:.2} V{:.2} H{:.2}" fill="none" stroke="black"/>"#,
            self.left, self.top, self.bottom, self.right
        );
        for &t in xticks {
            let x = self.px(t);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                self.bottom,
                self.bottom + 4.0,
                self.bottom + 16.0,
                tick_label(t)
            );
        }
        for &t in yticks {
            let y = self.py(t);
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                self.left - 4.0,
                self.left,
                self.left - 6.0,
                y + 4.0,
                tick_label(t)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            0.5 * (self.left + self.right),
            self.bottom + 34.0,
            escape(xlabel)
        );
        let (cx, cy) = (self.left - 40.0, 0.5 * (self.top + self.bottom));
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{cy:.2}" text-anchor="middle" transform="rotate(-90 {cx:.2} {cy:.2})">{}</text>"#,
            escape(ylabel)
        );
    }

    fn polyline(&self, out: &mut String, pts: &[(f64, f64)], attrs: &str) {
        if pts.is_empty() {
            return;
        }
        let mut d = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { 'M' } else { 'L' }, self.px(*x), self.py(*y));
        }
        let _ = writeln!(out, r#"<path d="{}" fill="none" {attrs}/>"#, d.trim_end());
    }
}

fn tick_label(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

fn ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// Residual map: each region filled by the colour of Φ⁻¹(pit), excluded
/// regions white, with a colour bar legend.
pub fn residual_map(
    regions: &[MapRegion],
    records: &[ResidualRecord],
    window: &Window,
    title: &str,
) -> Result<String> {
    if regions.len() != records.len() {
        return Err(Error::Data(format!(
            "{} regions but {} residual records",
            regions.len(),
            records.len()
        )));
    }
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let scale = plot_h / window.height().max(window.width() * plot_h / (WIDTH - 3.0 * MARGIN));
    let (w, h) = (window.width() * scale, window.height() * scale);
    let frame = Frame::new(
        (window.xmin, window.xmax),
        (window.ymin, window.ymax),
        MARGIN,
        MARGIN + w,
        MARGIN,
        MARGIN + h,
    );
    let mut out = String::new();
    open(&mut out, WIDTH, HEIGHT, title);
    out.push_str(r##"<g stroke="#808080" stroke-width="0.4">"##);
    out.push('\n');
    for (region, rec) in regions.iter().zip(records) {
        let fill = if rec.excluded {
            "#ffffff".to_owned()
        } else {
            ramp_color(residual_color_scale(rec.pit))
        };
        match region {
            MapRegion::Polygon(vs) => {
                let pts: Vec<String> = vs
                    .iter()
                    .map(|v| format!("{:.2},{:.2}", frame.px(v.x), frame.py(v.y)))
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polygon points="{}" fill="{fill}"/>"#,
                    pts.join(" ")
                );
            }
            MapRegion::Rect(r) => {
                let (x0, x1) = (frame.px(r.xmin), frame.px(r.xmax));
                let (y0, y1) = (frame.py(r.ymax), frame.py(r.ymin));
                let _ = writeln!(
                    out,
                    r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                    x1 - x0,
                    y1 - y0
                );
            }
        }
    }
    out.push_str("</g>\n");
    let _ = writeln!(
        out,
        r#"<path d="M{:.2},{:.2} H{:.2} V{:.2} H{:.2} Z" fill="none" stroke="black"/>"#,
        frame.left, frame.top, frame.right, frame.bottom, frame.left
    );

    // Colour bar from z = -3 (bottom) to 3 (top).
    let bar_x = frame.right + 24.0;
    let steps = 60;
    for i in 0..steps {
        let z = -Z_LIMIT + 2.0 * Z_LIMIT * (i as f64 + 0.5) / steps as f64;
        let y = frame.bottom - h * (i as f64 + 0.5) / steps as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{bar_x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="{:.2}"/>"#,
            bar_x + 14.0,
            ramp_color(z),
            h / steps as f64 + 0.5
        );
    }
    for z in [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0] {
        let y = frame.bottom - h * (z + Z_LIMIT) / (2.0 * Z_LIMIT);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            bar_x + 18.0,
            y + 4.0,
            tick_label(z)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">z</text>"#,
        bar_x + 4.0,
        frame.top - 8.0
    );
    close(&mut out);
    Ok(out)
}

/// PIT histogram with the simulation band drawn as a shaded envelope.
pub fn histogram(h: &PitHistogram, title: &str) -> String {
    let ymax = h
        .counts
        .iter()
        .map(|&c| c as f64)
        .chain(h.band_hi.iter().copied())
        .fold(1.0, f64::max)
        * 1.1;
    let frame = Frame::new((0.0, 1.0), (0.0, ymax), MARGIN, WIDTH - MARGIN / 2.0, MARGIN, HEIGHT - MARGIN);
    let mut out = String::new();
    open(&mut out, WIDTH, HEIGHT, title);
    for b in 0..h.bins() {
        let (x0, x1) = (frame.px(h.edges[b]), frame.px(h.edges[b + 1]));
        let y = frame.py(h.counts[b] as f64);
        let _ = writeln!(
            out,
            r##"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#9ecae1" stroke="#3182bd"/>"##,
            x1 - x0,
            frame.bottom - y
        );
    }
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for b in 0..h.bins() {
        for x in [h.edges[b], h.edges[b + 1]] {
            upper.push((x, h.band_hi[b]));
            lower.push((x, h.band_lo[b]));
        }
    }
    frame.polyline(&mut out, &upper, r##"stroke="#d62728" stroke-dasharray="5,3""##);
    frame.polyline(&mut out, &lower, r##"stroke="#d62728" stroke-dasharray="5,3""##);
    frame.axes(&mut out, "PIT", "count", &ticks(0.0, 1.0, 5), &ticks(0.0, ymax, 4));
    close(&mut out);
    out
}

/// Quantile plot of observed residuals against the reference law with the
/// pointwise simulation envelope.
pub fn quantile_plot(q: &QuantilePlot, title: &str) -> String {
    let all = q
        .theoretical
        .iter()
        .chain(&q.observed)
        .chain(&q.lower)
        .chain(&q.upper)
        .copied()
        .filter(|v| v.is_finite());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let frame = Frame::new((lo, hi), (lo, hi), MARGIN, WIDTH - MARGIN / 2.0, MARGIN, HEIGHT - MARGIN);
    let mut out = String::new();
    open(&mut out, WIDTH, HEIGHT, title);
    frame.polyline(&mut out, &[(lo, lo), (hi, hi)], r##"stroke="#999999""##);
    let zip = |ys: &[f64]| -> Vec<(f64, f64)> {
        q.theoretical.iter().copied().zip(ys.iter().copied()).collect()
    };
    frame.polyline(&mut out, &zip(&q.lower), r##"stroke="#d62728" stroke-dasharray="5,3""##);
    frame.polyline(&mut out, &zip(&q.upper), r##"stroke="#d62728" stroke-dasharray="5,3""##);
    frame.polyline(&mut out, &zip(&q.observed), r#"stroke="black" stroke-width="1.5""#);
    frame.axes(
        &mut out,
        "reference quantile",
        "observed residual",
        &ticks(lo, hi, 4),
        &ticks(lo, hi, 4),
    );
    close(&mut out);
    out
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Power against the proposed parameter, one curve per partition.
pub fn power_curves(rows: &[PowerLine], title: &str, xlabel: &str) -> String {
    let mut partitions: Vec<Partition> = Vec::new();
    for r in rows {
        if !partitions.contains(&r.partition) {
            partitions.push(r.partition);
        }
    }
    let (xlo, xhi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| {
            (a.min(r.proposed_value), b.max(r.proposed_value))
        });
    let (xlo, xhi) = if xlo.is_finite() { (xlo, xhi) } else { (0.0, 1.0) };
    let frame = Frame::new((xlo, xhi), (0.0, 1.0), MARGIN, WIDTH - 150.0, MARGIN, HEIGHT - MARGIN);
    let mut out = String::new();
    open(&mut out, WIDTH, HEIGHT, title);
    for (k, p) in partitions.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.partition == *p)
            .map(|r| (r.proposed_value, r.power))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        frame.polyline(&mut out, &pts, &format!(r#"stroke="{color}" stroke-width="1.5""#));
        for (x, y) in &pts {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                frame.px(*x),
                frame.py(*y)
            );
        }
        let ly = MARGIN + 18.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            WIDTH - 135.0,
            WIDTH - 110.0,
            WIDTH - 104.0,
            ly + 4.0,
            p
        );
    }
    frame.axes(&mut out, xlabel, "power", &ticks(xlo, xhi, 4), &ticks(0.0, 1.0, 5));
    close(&mut out);
    out
}
