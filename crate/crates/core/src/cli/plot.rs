//! Minimal SVG line charts.

use std::fmt::Write as _;

/// Points kept per series after decimation, in min/max pairs.
const MAX_POINTS: usize = 2400;

const WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 260.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 45.0;

pub const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#222222"];

pub struct Series<'a> {
    pub label: String,
    pub color: &'static str,
    pub dashed: bool,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

pub struct Panel<'a> {
    pub ylabel: String,
    pub series: Vec<Series<'a>>,
}

/// Keeps the extremes of each bucket so that chattering envelopes survive.
fn decimate(x: &[f64], y: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len().min(y.len());
    if n <= MAX_POINTS {
        return (0..n).map(|i| (x[i], y[i])).collect();
    }
    let buckets = MAX_POINTS / 2;
    let mut out = Vec::with_capacity(MAX_POINTS);
    for b in 0..buckets {
        let lo = b * n / buckets;
        let hi = ((b + 1) * n / buckets).max(lo + 1);
        let (mut imin, mut imax) = (lo, lo);
        for i in lo..hi {
            if y[i] < y[imin] {
                imin = i;
            }
            if y[i] > y[imax] {
                imax = i;
            }
        }
        let (a, c) = if imin <= imax { (imin, imax) } else { (imax, imin) };
        out.push((x[a], y[a]));
        if c != a {
            out.push((x[c], y[c]));
        }
    }
    out
}

/// Round tick spacing covering `span` with about `target` intervals.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn fmt_tick(v: f64, step: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if step.abs() >= 1e-3 && v.abs() < 1e5 {
        let decimals = (-step.log10().floor()).max(0.0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.1e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Stacked panels sharing the time axis.
pub fn render(title: &str, xlabel: &str, panels: &[Panel]) -> String {
    let height = MARGIN_TOP + panels.len() as f64 * (PANEL_HEIGHT + MARGIN_BOTTOM);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in panels.iter().flat_map(|p| &p.series) {
        for &x in s.x {
            x0 = x0.min(x);
            x1 = x1.max(x);
        }
    }
    if !(x0.is_finite() && x1 > x0) {
        (x0, x1) = (0.0, 1.0);
    }

    for (k, panel) in panels.iter().enumerate() {
        let top = MARGIN_TOP + k as f64 * (PANEL_HEIGHT + MARGIN_BOTTOM);
        let bottom = top + PANEL_HEIGHT;
        let lines: Vec<Vec<(f64, f64)>> = panel.series.iter().map(|s| decimate(s.x, s.y)).collect();
        let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(_, y) in lines.iter().flatten() {
            if y.is_finite() {
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
        if !y0.is_finite() {
            (y0, y1) = (-1.0, 1.0);
        }
        if y1 - y0 <= f64::EPSILON * y0.abs().max(1e-300) {
            let pad = if y0 == 0.0 { 1.0 } else { 0.1 * y0.abs() };
            (y0, y1) = (y0 - pad, y1 + pad);
        }
        let pad = 0.05 * (y1 - y0);
        (y0, y1) = (y0 - pad, y1 + pad);
        let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
        let sy = |y: f64| bottom - (y - y0) / (y1 - y0) * PANEL_HEIGHT;

        let _ = writeln!(
            svg,
            r##"<rect x="{MARGIN_LEFT}" y="{top}" width="{plot_w}" height="{PANEL_HEIGHT}" fill="none" stroke="#888"/>"##
        );
        let ystep = tick_step(y1 - y0, 5.0);
        let mut v = (y0 / ystep).ceil() * ystep;
        while v <= y1 {
            let y = sy(v);
            let _ = writeln!(
                svg,
                r##"<line x1="{MARGIN_LEFT}" x2="{}" y1="{y:.2}" y2="{y:.2}" stroke="#eee"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
                MARGIN_LEFT + plot_w,
                MARGIN_LEFT - 6.0,
                y + 4.0,
                fmt_tick(v, ystep)
            );
            v += ystep;
        }
        let xstep = tick_step(x1 - x0, 8.0);
        let mut v = (x0 / xstep).ceil() * xstep;
        while v <= x1 + 1e-9 * xstep {
            let x = sx(v);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" x2="{x:.2}" y1="{top}" y2="{bottom}" stroke="#eee"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"##,
                bottom + 16.0,
                fmt_tick(v, xstep)
            );
            v += xstep;
        }
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            top + PANEL_HEIGHT / 2.0,
            top + PANEL_HEIGHT / 2.0,
            escape(&panel.ylabel)
        );
        if k + 1 == panels.len() {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                MARGIN_LEFT + plot_w / 2.0,
                bottom + 34.0,
                escape(xlabel)
            );
        }

        for (i, (s, pts)) in panel.series.iter().zip(&lines).enumerate() {
            let mut d = String::with_capacity(pts.len() * 16);
            for (j, &(x, y)) in pts.iter().filter(|(_, y)| y.is_finite()).enumerate() {
                let _ = write!(d, "{}{:.2},{:.2}", if j == 0 { "M" } else { "L" }, sx(x), sy(y));
            }
            let dash = if s.dashed { r#" stroke-dasharray="6,4""# } else { "" };
            let _ = writeln!(
                svg,
                r#"<path d="{d}" fill="none" stroke="{}" stroke-width="1.2"{dash}/>"#,
                s.color
            );
            let ly = top + 14.0 + 18.0 * i as f64;
            let lx = MARGIN_LEFT + plot_w + 12.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{lx}" x2="{}" y1="{ly}" y2="{ly}" stroke="{}" stroke-width="2"{dash}/><text x="{}" y="{}">{}</text>"#,
                lx + 22.0,
                s.color,
                lx + 28.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}
