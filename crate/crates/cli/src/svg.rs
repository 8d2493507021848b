//! Minimal self-contained SVG line charts.

use std::fmt::Write;

const PALETTE: [&str; 6] = ["#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"];
const MARK: &str = "#d62728";
const AXIS: &str = "#444444";

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Highlighted points, drawn as red dots.
    pub marks: Vec<(f64, f64)>,
}

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 320.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 32.0;
const MARGIN_B: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    let pad = (hi - lo) * 0.05;
    (lo - pad, hi + pad)
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

impl Chart {
    fn render_into(&self, out: &mut String, ox: f64, oy: f64) {
        let all = || self.series.iter().flat_map(|s| s.points.iter()).chain(&self.marks);
        let (x0, x1) = extent(all().map(|p| p.0));
        let (y0, y1) = extent(all().map(|p| p.1));
        let pw = PANEL_W - MARGIN_L - MARGIN_R;
        let ph = PANEL_H - MARGIN_T - MARGIN_B;
        let sx = |x: f64| ox + MARGIN_L + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| oy + MARGIN_T + (1.0 - (y - y0) / (y1 - y0)) * ph;

        let _ = writeln!(
            out,
            r#"<g><rect x="{:.2}" y="{:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="{AXIS}"/>"#,
            ox + MARGIN_L,
            oy + MARGIN_T
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
            ox + MARGIN_L + pw / 2.0,
            oy + 20.0,
            escape(&self.title)
        );
        for i in 0..=4 {
            let fx = x0 + (x1 - x0) * i as f64 / 4.0;
            let fy = y0 + (y1 - y0) * i as f64 / 4.0;
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
                sx(fx),
                oy + MARGIN_T + ph + 14.0,
                tick_label(fx)
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{}</text>"#,
                ox + MARGIN_L - 4.0,
                sy(fy) + 3.0,
                tick_label(fy)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
            ox + MARGIN_L + pw / 2.0,
            oy + PANEL_H - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            ox + 14.0,
            oy + MARGIN_T + ph / 2.0,
            ox + 14.0,
            oy + MARGIN_T + ph / 2.0,
            escape(&self.y_label)
        );
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
                pts.join(" "),
                escape(&s.name)
            );
            if self.series.len() > 1 {
                let ly = oy + MARGIN_T + 12.0 + 14.0 * i as f64;
                let lx = ox + PANEL_W - MARGIN_R - 150.0;
                let _ = writeln!(
                    out,
                    r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{ly:.2}" font-size="10">{}</text>"#,
                    ly - 3.0,
                    lx + 16.0,
                    ly - 3.0,
                    lx + 20.0,
                    escape(&s.name)
                );
            }
        }
        for &(x, y) in &self.marks {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{MARK}"/>"#,
                sx(x),
                sy(y)
            );
        }
        out.push_str("</g>\n");
    }

    pub fn render(&self) -> String {
        render_panels(std::slice::from_ref(self), 1)
    }
}

/// Lays charts out on a grid with `columns` panels per row.
pub fn render_panels(charts: &[Chart], columns: usize) -> String {
    let columns = columns.max(1);
    let rows = charts.len().div_ceil(columns).max(1);
    let (w, h) = (PANEL_W * columns.min(charts.len().max(1)) as f64, PANEL_H * rows as f64);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="sans-serif">
<rect width="100%" height="100%" fill="white"/>"#
    );
    for (i, chart) in charts.iter().enumerate() {
        let ox = PANEL_W * (i % columns) as f64;
        let oy = PANEL_H * (i / columns) as f64;
        chart.render_into(&mut out, ox, oy);
    }
    out.push_str("</svg>\n");
    out
}
