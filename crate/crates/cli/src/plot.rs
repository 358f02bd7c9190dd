//! Minimal deterministic SVG charts: line plots and side-by-side scatter
//! panels on a fixed 800x500 canvas.

use std::fmt::Write as _;

use infoextract::{Error, Result};

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 500.0;
/// Scatter panels draw at most this many points per series.
pub const MAX_SCATTER_POINTS: usize = 2000;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            points,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelKind {
    Line,
    Scatter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub kind: PanelKind,
    pub series: Vec<Series>,
    /// Dashed vertical marker with a label, e.g. an argmax.
    pub marker: Option<(f64, String)>,
}

impl Panel {
    pub fn line(title: impl Into<String>, series: Vec<Series>) -> Self {
        Self {
            title: title.into(),
            x_label: String::new(),
            y_label: String::new(),
            kind: PanelKind::Line,
            series,
            marker: None,
        }
    }

    pub fn scatter(title: impl Into<String>, series: Vec<Series>) -> Self {
        Self {
            kind: PanelKind::Scatter,
            ..Self::line(title, series)
        }
    }

    pub fn labels(mut self, x: impl Into<String>, y: impl Into<String>) -> Self {
        self.x_label = x.into();
        self.y_label = y.into();
        self
    }
}

/// Short tick label: up to 4 significant digits, no trailing zeros.
fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let digits = (3 - v.abs().log10().floor() as i32).clamp(0, 10) as usize;
    let s = format!("{v:.digits$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Two decimals is well below a pixel and keeps output stable.
fn px(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi > lo {
        let pad = (hi - lo) * 0.05;
        (lo - pad, hi + pad)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn validate(panels: &[Panel]) -> Result<()> {
    if panels.is_empty() {
        return Err(Error::InvalidInput("plot needs at least one panel".into()));
    }
    for p in panels {
        if p.series.is_empty() {
            return Err(Error::InvalidInput(format!("panel '{}' has no series", p.title)));
        }
        for s in &p.series {
            if s.points.is_empty() {
                return Err(Error::InvalidInput(format!("series '{}' is empty", s.name)));
            }
            if s.points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "series '{}' has non-finite points",
                    s.name
                )));
            }
        }
    }
    Ok(())
}

fn render_panel(out: &mut String, panel: &Panel, x0: f64, width: f64) {
    let (left, right, top, bottom) = (x0 + 60.0, x0 + width - 20.0, 40.0, HEIGHT - 50.0);
    let points = |s: &Series| -> Vec<(f64, f64)> {
        match panel.kind {
            PanelKind::Line => s.points.clone(),
            PanelKind::Scatter => s.points.iter().take(MAX_SCATTER_POINTS).copied().collect(),
        }
    };
    let all: Vec<(f64, f64)> = panel.series.iter().flat_map(points).collect();
    let (xmin, xmax) = range(all.iter().map(|p| p.0));
    let (ymin, ymax) = range(all.iter().map(|p| p.1));
    let sx = |x: f64| left + (x - xmin) / (xmax - xmin) * (right - left);
    let sy = |y: f64| bottom - (y - ymin) / (ymax - ymin) * (bottom - top);

    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        px((left + right) / 2.0),
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#000"/>"##,
        px(left),
        px(top),
        px(right - left),
        px(bottom - top)
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = xmin + f * (xmax - xmin);
        let yv = ymin + f * (ymax - ymin);
        let (tx, ty) = (sx(xv), sy(yv));
        let _ = writeln!(
            out,
            r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#000"/><text x="{0}" y="{3}" text-anchor="middle" font-size="11">{4}</text>"##,
            px(tx),
            px(bottom),
            px(bottom + 5.0),
            px(bottom + 18.0),
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#000"/><text x="{3}" y="{4}" text-anchor="end" font-size="11">{5}</text>"##,
            px(left - 5.0),
            px(ty),
            px(left),
            px(left - 8.0),
            px(ty + 4.0),
            tick_label(yv)
        );
    }
    if !panel.x_label.is_empty() {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
            px((left + right) / 2.0),
            px(HEIGHT - 12.0),
            escape(&panel.x_label)
        );
    }
    if !panel.y_label.is_empty() {
        let (lx, ly) = (x0 + 14.0, (top + bottom) / 2.0);
        let _ = writeln!(
            out,
            r#"<text x="{0}" y="{1}" text-anchor="middle" font-size="12" transform="rotate(-90 {0} {1})">{2}</text>"#,
            px(lx),
            px(ly),
            escape(&panel.y_label)
        );
    }
    if let Some((mx, label)) = &panel.marker {
        if *mx >= xmin && *mx <= xmax {
            let _ = writeln!(
                out,
                r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#555" stroke-dasharray="4 3"/><text x="{3}" y="{4}" font-size="11">{5}</text>"##,
                px(sx(*mx)),
                px(top),
                px(bottom),
                px(sx(*mx) + 4.0),
                px(top + 14.0),
                escape(label)
            );
        }
    }
    for (i, s) in panel.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts = points(s);
        match panel.kind {
            PanelKind::Line => {
                let coords: Vec<String> = pts
                    .iter()
                    .map(|&(x, y)| format!("{},{}", px(sx(x)), px(sy(y))))
                    .collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    coords.join(" ")
                );
            }
            PanelKind::Scatter => {
                let _ = writeln!(out, r#"<g fill="{color}" fill-opacity="0.5">"#);
                for &(x, y) in &pts {
                    let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="1.5"/>"#, px(sx(x)), px(sy(y)));
                }
                out.push_str("</g>\n");
            }
        }
        // legend entry, top-right inside the frame
        let ly = top + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/><text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
            px(right - 16.0),
            px(ly - 9.0),
            px(right - 20.0),
            px(ly),
            escape(&s.name)
        );
    }
}

/// Renders panels side by side on one canvas.
pub fn render_svg(panels: &[Panel]) -> Result<String> {
    validate(panels)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
        w = WIDTH,
        h = HEIGHT
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n");
    let width = WIDTH / panels.len() as f64;
    for (i, p) in panels.iter().enumerate() {
        render_panel(&mut out, p, i as f64 * width, width);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// One line-plot panel, one polyline per series.
pub fn lineplot_svg(title: &str, series: Vec<Series>) -> Result<String> {
    if series.is_empty() {
        return Err(Error::InvalidInput("line plot needs at least one series".into()));
    }
    render_svg(&[Panel::line(title, series)])
}

pub fn emit_svg_lineplot(title: &str, series: Vec<Series>, path: &std::path::Path) -> Result<()> {
    infoextract::datasets::write_text(path, &lineplot_svg(title, series)?)
}

/// Two scatter panels of the same column pair before and after a transform.
pub fn scatter_pair_svg(
    x_label: &str,
    y_label: &str,
    before: Vec<(f64, f64)>,
    after: Vec<(f64, f64)>,
) -> Result<String> {
    render_svg(&[
        Panel::scatter("before", vec![Series::new("before", before)]).labels(x_label, y_label),
        Panel::scatter("after", vec![Series::new("after", after)]).labels(x_label, y_label),
    ])
}
