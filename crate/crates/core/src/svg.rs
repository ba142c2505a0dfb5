//! Minimal self-contained SVG charts: scatter plots and histograms with an
//! optional curve overlay.

use std::fmt::Write;

use crate::fmt::sig12;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn nice_step(span: f64, target: usize) -> f64 {
    let raw = span / target as f64;
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

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let step = nice_step(hi - lo, 6);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(if t.abs() < step * 1e-9 { 0.0 } else { t });
        t += step;
    }
    out
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = lo.abs().max(1.0) * 0.5;
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    fn open(&self, title: &str, x_label: &str, y_label: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(title)
        );
        let (x0, x1) = (self.px(self.x.0), self.px(self.x.1));
        let (y0, y1) = (self.py(self.y.0), self.py(self.y.1));
        let _ = writeln!(
            s,
            r#"<g class="axes" stroke="black" fill="none"><line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/></g>"#
        );
        s.push_str("<g class=\"ticks\">\n");
        for t in ticks(self.x.0, self.x.1) {
            let x = self.px(t);
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                y0 + 5.0,
                y0 + 18.0,
                sig12(t)
            );
        }
        for t in ticks(self.y.0, self.y.1) {
            let y = self.py(t);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                x0 - 5.0,
                x0 - 8.0,
                y + 4.0,
                sig12(t)
            );
        }
        s.push_str("</g>\n");
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>
<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 15.0,
            escape(x_label),
            (y0 + y1) / 2.0,
            escape(y_label)
        );
        s
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Scatter plot with one `<circle class="marker">` per point.
pub fn scatter(points: &[(f64, f64)], title: &str, x_label: &str, y_label: &str) -> String {
    let (xl, xh) = extent(points.iter().map(|p| p.0));
    let (yl, yh) = extent(points.iter().map(|p| p.1));
    let frame = Frame {
        x: padded(xl, xh),
        y: padded(yl.min(0.0), yh.max(0.0)),
    };
    let mut s = frame.open(title, x_label, y_label);
    if frame.y.0 < 0.0 && frame.y.1 > 0.0 {
        let y = frame.py(0.0);
        let _ = writeln!(
            s,
            r##"<line class="zero" x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            frame.px(frame.x.0),
            frame.px(frame.x.1)
        );
    }
    s.push_str("<g class=\"points\" fill=\"#1f77b4\">\n");
    for &(x, y) in points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
        let _ = writeln!(
            s,
            r#"<circle class="marker" cx="{:.2}" cy="{:.2}" r="2.5"/>"#,
            frame.px(x),
            frame.py(y)
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// Bars over `edges` (len = heights + 1) plus an optional polyline overlay.
pub fn histogram(
    edges: &[f64],
    heights: &[f64],
    overlay: Option<&[(f64, f64)]>,
    title: &str,
    x_label: &str,
    y_label: &str,
) -> String {
    assert_eq!(edges.len(), heights.len() + 1, "edges must bracket every bar");
    let top = heights
        .iter()
        .copied()
        .chain(overlay.unwrap_or(&[]).iter().map(|p| p.1))
        .fold(0.0f64, f64::max);
    let frame = Frame {
        x: (edges[0], *edges.last().expect("at least one edge")),
        y: (0.0, if top > 0.0 { top * 1.1 } else { 1.0 }),
    };
    let mut s = frame.open(title, x_label, y_label);
    s.push_str("<g class=\"bars\" fill=\"#9ecae1\" stroke=\"#3182bd\">\n");
    for (k, &h) in heights.iter().enumerate() {
        let (x0, x1) = (frame.px(edges[k]), frame.px(edges[k + 1]));
        let (y0, y1) = (frame.py(0.0), frame.py(h));
        let _ = writeln!(
            s,
            r#"<rect class="bar" x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}"/>"#,
            x1 - x0,
            y0 - y1
        );
    }
    s.push_str("</g>\n");
    if let Some(curve) = overlay {
        let pts: Vec<String> = curve
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline class="density" fill="none" stroke="#d62728" stroke-width="2" points="{}"/>"##,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}
