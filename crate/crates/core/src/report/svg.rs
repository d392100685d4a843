//! Hand-written SVG for singular-value plots and biplots.
//!
//! Coordinates are printed with two decimals so the bytes depend only on the
//! input values.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Zero, negative and smaller positive values are drawn at this height.
pub const LOG_FLOOR: f64 = 1e-17;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSeries {
    pub label: String,
    pub values: Vec<f64>,
}

impl SpectrumSeries {
    pub fn new(label: &str, values: &[f64]) -> Self {
        SpectrumSeries {
            label: label.to_string(),
            values: values.to_vec(),
        }
    }
}

const COLORS: [&str; 3] = ["black", "#1f5fa8", "#b8322a"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn marker(out: &mut String, shape: usize, x: f64, y: f64, color: &str, extra: &str) {
    match shape % 3 {
        0 => {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{color}"{extra}/>"#);
        }
        1 => {
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="7" height="7" fill="none" stroke="{color}"{extra}/>"#,
                x - 3.5,
                y - 3.5
            );
        }
        _ => {
            let _ = writeln!(
                out,
                r#"<path d="M{x:.2} {:.2} L{:.2} {y:.2} L{x:.2} {:.2} L{:.2} {y:.2} Z" fill="none" stroke="{color}"{extra}/>"#,
                y - 4.5,
                x + 4.5,
                y + 4.5,
                x - 4.5
            );
        }
    }
}

/// Singular values on a log₁₀ axis, one marker style per series.
pub fn render_svplot(series: &[SpectrumSeries]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::contract("singular-value plot needs at least one series"));
    }
    if let Some(s) = series.iter().find(|s| s.values.is_empty()) {
        return Err(Error::contract(format!("series {:?} is empty", s.label)));
    }
    if series.iter().flat_map(|s| &s.values).any(|v| !v.is_finite()) {
        return Err(Error::contract("singular values must be finite"));
    }
    let log = |v: f64| if v > 0.0 { v.log10().max(LOG_FLOOR.log10()) } else { LOG_FLOOR.log10() };
    let floored = series.iter().flat_map(|s| &s.values).any(|&v| v < LOG_FLOOR);
    let logs = series.iter().flat_map(|s| s.values.iter().map(|&v| log(v)));
    let (mut lo, mut hi) = logs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    lo = lo.floor();
    hi = hi.ceil();
    if hi - lo < 1.0 {
        lo -= 1.0;
        hi += 1.0;
    }
    let n = series.iter().map(|s| s.values.len()).max().unwrap_or(1);

    let (x0, x1, y0, y1) = (70.0, 390.0, 20.0, 290.0);
    let px = |i: usize| x0 + (i as f64 + 0.5) / n as f64 * (x1 - x0);
    let py = |v: f64| y1 - (v - lo) / (hi - lo) * (y1 - y0);

    let mut out = String::new();
    out.push_str(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="560" height="340" viewBox="0 0 560 340" font-family="sans-serif" font-size="11">"#,
    );
    out.push('\n');
    out.push_str(r#"<rect x="0" y="0" width="560" height="340" fill="white"/>"#);
    out.push('\n');
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );

    let span = (hi - lo) as usize;
    let step = span.div_ceil(10).max(1);
    let mut t = 0;
    while t <= span {
        let v = hi - t as f64;
        let y = py(v);
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#, x0 - 4.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 7.0,
            y + 4.0,
            v as i64
        );
        t += step;
    }
    let xstep = n.div_ceil(10).max(1);
    let mut i = 1;
    while i <= n {
        let x = px(i - 1);
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{y1:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y1 + 4.0);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{i}</text>"#, y1 + 16.0);
        i += xstep;
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="325" text-anchor="middle">index</text>"#, (x0 + x1) / 2.0);
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">log10(singular value)</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    for (s, ser) in series.iter().enumerate() {
        let color = COLORS[s % COLORS.len()];
        let _ = writeln!(out, r#"<g class="series" data-label="{}">"#, escape(&ser.label));
        for (i, &v) in ser.values.iter().enumerate() {
            let lv = log(v);
            marker(&mut out, s, px(i), py(lv), color, &format!(r#" data-log10="{lv:.6}""#));
        }
        out.push_str("</g>\n");
    }

    let lx = x1 + 20.0;
    for (s, ser) in series.iter().enumerate() {
        let y = y0 + 12.0 + 18.0 * s as f64;
        marker(&mut out, s, lx, y, COLORS[s % COLORS.len()], "");
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 10.0, y + 4.0, escape(&ser.label));
    }
    if floored {
        let y = y0 + 12.0 + 18.0 * series.len() as f64;
        let _ = writeln!(out, r#"<text x="{:.2}" y="{y:.2}">values below 1e-17 drawn at 1e-17</text>"#, lx - 4.0);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_svplot(series: &[SpectrumSeries], path: &Path) -> Result<()> {
    let svg = render_svplot(series)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

/// Scores as black dots, loadings as gray rays from the origin, on equal axes.
pub fn render_biplot(scores: &Matrix, loadings: &Matrix) -> Result<String> {
    for (name, m) in [("scores", scores), ("loadings", loadings)] {
        if m.cols() != 2 {
            return Err(Error::contract(format!(
                "biplot {name} must have 2 coordinates per point, got {}",
                m.cols()
            )));
        }
    }
    let extent = scores.max_abs().max(loadings.max_abs());
    let extent = if extent > 0.0 { 1.1 * extent } else { 1.0 };
    let (c, half) = (180.0, 150.0);
    let px = |v: f64| c + v / extent * half;
    let py = |v: f64| c - v / extent * half;

    let mut out = String::new();
    out.push_str(
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="360" height="360" viewBox="0 0 360 360" font-family="sans-serif" font-size="11">"#,
    );
    out.push('\n');
    out.push_str(r#"<rect x="0" y="0" width="360" height="360" fill="white"/>"#);
    out.push('\n');
    let _ = writeln!(
        out,
        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        c - half,
        c - half,
        2.0 * half,
        2.0 * half
    );
    let _ = writeln!(
        out,
        r##"<line class="axis" x1="{:.2}" y1="{c:.2}" x2="{:.2}" y2="{c:.2}" stroke="#dddddd"/>"##,
        c - half,
        c + half
    );
    let _ = writeln!(
        out,
        r##"<line class="axis" x1="{c:.2}" y1="{:.2}" x2="{c:.2}" y2="{:.2}" stroke="#dddddd"/>"##,
        c - half,
        c + half
    );
    let _ = writeln!(out, r#"<text x="{:.2}" y="352" text-anchor="end">±{}</text>"#, c + half, fmt_extent(extent));

    out.push_str("<g class=\"loadings\">\n");
    for i in 0..loadings.rows() {
        let _ = writeln!(
            out,
            r#"<line x1="{c:.2}" y1="{c:.2}" x2="{:.2}" y2="{:.2}" stroke="gray"/>"#,
            px(loadings[(i, 0)]),
            py(loadings[(i, 1)])
        );
    }
    out.push_str("</g>\n<g class=\"scores\">\n");
    for i in 0..scores.rows() {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="black"/>"#,
            px(scores[(i, 0)]),
            py(scores[(i, 1)])
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

fn fmt_extent(v: f64) -> String {
    format!("{v:.3e}")
}

pub fn emit_biplot(scores: &Matrix, loadings: &Matrix, path: &Path) -> Result<()> {
    let svg = render_biplot(scores, loadings)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
