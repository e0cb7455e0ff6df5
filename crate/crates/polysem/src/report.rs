//! Standalone SVG rendering for the batch outputs: PCA scatter plots,
//! similarity heatmaps, and topic-sense stacked bars.
//!
//! Everything here is a pure function of its input; identical input gives
//! byte-identical SVG, so the outputs are golden-file testable.

use thiserror::Error;

use crate::embeddings::SimilarityMatrix;
use crate::num::Real;
use crate::projection::LabeledPoint;
use crate::senseinduction::TopicSenseDistribution;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("non-finite coordinate for point {0:?}")]
    NonFiniteCoordinate(String),
    #[error("cannot render an empty {0}")]
    EmptyInput(&'static str),
    #[error("plot spec invalid: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub width: u32,
    pub height: u32,
    pub palette: Vec<String>,
    pub margin: u32,
}

/// 10 distinguishable default colors; groups beyond that cycle.
pub const DEFAULT_PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

impl Default for PlotSpec {
    fn default() -> Self {
        PlotSpec {
            title: String::new(),
            width: 800,
            height: 600,
            palette: DEFAULT_PALETTE.iter().map(|s| s.to_string()).collect(),
            margin: 60,
        }
    }
}

impl PlotSpec {
    pub fn with_title(title: &str) -> Self {
        PlotSpec {
            title: title.to_string(),
            ..PlotSpec::default()
        }
    }

    fn validate(&self) -> Result<(), ReportError> {
        if self.width < 100 || self.height < 100 {
            return Err(ReportError::InvalidSpec(format!(
                "width and height must be ≥ 100, got {}x{}",
                self.width, self.height
            )));
        }
        if self.palette.is_empty() {
            return Err(ReportError::InvalidSpec("palette is empty".into()));
        }
        Ok(())
    }

    fn color(&self, index: usize) -> &str {
        if index >= self.palette.len() {
            eprintln!(
                "warning: {} groups exceed the {}-color palette; colors repeat",
                index + 1,
                self.palette.len()
            );
        }
        &self.palette[index % self.palette.len()]
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn svg_open(spec: &PlotSpec) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
        w = spec.width,
        h = spec.height
    );
    s.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        spec.width, spec.height
    ));
    if !spec.title.is_empty() {
        s.push_str(&format!(
            "  <text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
            spec.width / 2,
            xml_escape(&spec.title)
        ));
    }
    s
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn legend(spec: &PlotSpec, entries: &[String], x: f64, y0: f64) -> String {
    let mut s = String::new();
    for (i, label) in entries.iter().enumerate() {
        let y = y0 + 18.0 * i as f64;
        s.push_str(&format!(
            "  <rect class=\"legend\" x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n",
            fmt(x),
            fmt(y - 10.0),
            spec.color(i)
        ));
        s.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            fmt(x + 16.0),
            fmt(y),
            xml_escape(label)
        ));
    }
    s
}

/// One circle per point colored by group, label 4px to the right, linear
/// axes padded 5% beyond the data extent.
pub fn render_scatter<R: Real>(
    points: &[LabeledPoint<R>],
    spec: &PlotSpec,
) -> Result<String, ReportError> {
    spec.validate()?;
    if points.is_empty() {
        return Err(ReportError::EmptyInput("scatter plot"));
    }
    for p in points {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(ReportError::NonFiniteCoordinate(p.word.clone()));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.x.to_f64_c()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.y.to_f64_c()).collect();
    let (mut x_min, mut x_max) = extent(&xs);
    let (mut y_min, mut y_max) = extent(&ys);
    pad_extent(&mut x_min, &mut x_max);
    pad_extent(&mut y_min, &mut y_max);

    let m = spec.margin as f64;
    let pw = spec.width as f64 - 2.0 * m;
    let ph = spec.height as f64 - 2.0 * m;
    let sx = |x: f64| m + (x - x_min) / (x_max - x_min) * pw;
    let sy = |y: f64| m + ph - (y - y_min) / (y_max - y_min) * ph;

    // group order: first appearance
    let mut groups: Vec<String> = Vec::new();
    for p in points {
        if !groups.contains(&p.group) {
            groups.push(p.group.clone());
        }
    }

    let mut svg = svg_open(spec);
    svg.push_str(&format!(
        "  <rect class=\"frame\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#333333\"/>\n",
        fmt(m), fmt(m), fmt(pw), fmt(ph)
    ));
    for (label, v) in [("x-min", x_min), ("x-max", x_max)] {
        let anchor = if label == "x-min" { "start" } else { "end" };
        let x = if label == "x-min" { m } else { m + pw };
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"{anchor}\">{}</text>\n",
            fmt(x),
            fmt(m + ph + 14.0),
            fmt(v)
        ));
    }
    for (label, v) in [("y-min", y_min), ("y-max", y_max)] {
        let y = if label == "y-min" { m + ph } else { m + 4.0 };
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{}</text>\n",
            fmt(m - 4.0),
            fmt(y),
            fmt(v)
        ));
    }
    for p in points {
        let group_index = groups.iter().position(|g| g == &p.group).unwrap();
        let cx = sx(p.x.to_f64_c());
        let cy = sy(p.y.to_f64_c());
        svg.push_str(&format!(
            "  <circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\"/>\n",
            fmt(cx),
            fmt(cy),
            spec.color(group_index)
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            fmt(cx + 4.0),
            fmt(cy + 4.0),
            xml_escape(&p.word)
        ));
    }
    svg.push_str(&legend(spec, &groups, m + pw + 8.0, m + 12.0));
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn extent(vals: &[f64]) -> (f64, f64) {
    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

fn pad_extent(min: &mut f64, max: &mut f64) {
    let span = *max - *min;
    let pad = if span > 0.0 { span * 0.05 } else { 1.0 };
    *min -= pad;
    *max += pad;
}

/// Diverging color for values in [-1, 1]: blue below zero, white at zero,
/// red above.
fn diverging_color(v: f64) -> String {
    let v = v.clamp(-1.0, 1.0);
    let lerp = |a: f64, b: f64, t: f64| (a + (b - a) * t).round() as u8;
    let (r, g, b) = if v < 0.0 {
        let t = 1.0 + v; // 0 at -1, 1 at 0
        (lerp(33.0, 255.0, t), lerp(102.0, 255.0, t), lerp(172.0, 255.0, t))
    } else {
        let t = v;
        (lerp(255.0, 178.0, t), lerp(255.0, 24.0, t), lerp(255.0, 43.0, t))
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// n×n colored cells on a diverging [-1, 1] scale with the value overlaid
/// to 2 decimals.
pub fn render_heatmap<R: Real>(
    matrix: &SimilarityMatrix<R>,
    spec: &PlotSpec,
) -> Result<String, ReportError> {
    spec.validate()?;
    let n = matrix.labels.len();
    if n == 0 {
        return Err(ReportError::EmptyInput("heatmap"));
    }
    let m = spec.margin as f64;
    let pw = spec.width as f64 - 2.0 * m;
    let ph = spec.height as f64 - 2.0 * m;
    let cell_w = pw / n as f64;
    let cell_h = ph / n as f64;

    let mut svg = svg_open(spec);
    for (i, label) in matrix.labels.iter().enumerate() {
        // column labels on top, row labels on the left
        svg.push_str(&format!(
            "  <text class=\"col-label\" x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
            fmt(m + (i as f64 + 0.5) * cell_w),
            fmt(m - 8.0),
            xml_escape(label)
        ));
        svg.push_str(&format!(
            "  <text class=\"row-label\" x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            fmt(m - 8.0),
            fmt(m + (i as f64 + 0.5) * cell_h + 4.0),
            xml_escape(label)
        ));
    }
    for i in 0..n {
        for j in 0..n {
            let v = matrix.values[i][j].to_f64_c();
            let x = m + j as f64 * cell_w;
            let y = m + i as f64 * cell_h;
            svg.push_str(&format!(
                "  <rect class=\"cell\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#cccccc\"/>\n",
                fmt(x),
                fmt(y),
                fmt(cell_w),
                fmt(cell_h),
                diverging_color(v)
            ));
            svg.push_str(&format!(
                "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
                fmt(x + cell_w / 2.0),
                fmt(y + cell_h / 2.0 + 4.0),
                fmt(v)
            ));
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// One bar per topic, stacked segments proportional to sense fractions.
/// Empty topics render as an outlined empty bar.
pub fn render_stacked_bars(
    dist: &TopicSenseDistribution,
    spec: &PlotSpec,
) -> Result<String, ReportError> {
    spec.validate()?;
    if dist.rows.is_empty() {
        return Err(ReportError::EmptyInput("stacked bar chart"));
    }
    let k = dist.rows.len();
    let m = spec.margin as f64;
    let pw = spec.width as f64 - 2.0 * m;
    let ph = spec.height as f64 - 2.0 * m;
    let slot = pw / k as f64;
    let bar_w = slot * 0.6;

    let mut svg = svg_open(spec);
    for (t, row) in dist.rows.iter().enumerate() {
        let x = m + t as f64 * slot + (slot - bar_w) / 2.0;
        svg.push_str(&format!(
            "  <g class=\"bar\" data-topic=\"{t}\">\n"
        ));
        if dist.empty_topics[t] {
            svg.push_str(&format!(
                "    <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#999999\" stroke-dasharray=\"4 2\"/>\n",
                fmt(x),
                fmt(m),
                fmt(bar_w),
                fmt(ph)
            ));
        } else {
            let mut acc = 0.0f64;
            for (s, &frac) in row.iter().enumerate() {
                if frac <= 0.0 {
                    continue;
                }
                let seg_h = frac * ph;
                let y = m + ph - (acc + frac) * ph;
                svg.push_str(&format!(
                    "    <rect class=\"segment\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                    fmt(x),
                    fmt(y),
                    fmt(bar_w),
                    fmt(seg_h),
                    spec.color(s)
                ));
                acc += frac;
            }
        }
        svg.push_str("  </g>\n");
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">Topic {t}</text>\n",
            fmt(x + bar_w / 2.0),
            fmt(m + ph + 16.0)
        ));
    }
    svg.push_str(&legend(spec, &dist.sense_ids, m + pw + 8.0, m + 12.0));
    svg.push_str("</svg>\n");
    Ok(svg)
}
