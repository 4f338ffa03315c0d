//! CSV tables and minimal SVG line plots.
//!
//! Numbers are printed with 12 significant digits so repeated runs diff
//! cleanly; an empty cell stands for "not available" (e.g. the logarithm of
//! a zero error).

use std::fmt::Write as _;
use std::path::Path;

/// 12-significant-digit scientific formatting.
pub fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Optional cell: `None` renders as the empty string.
pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt12).unwrap_or_default()
}

/// `log10` of a non-negative quantity; zero (or non-finite) maps to `None`
/// so the CSV cell stays empty.
pub fn log10_cell(x: f64) -> Option<f64> {
    if x > 0.0 && x.is_finite() {
        Some(x.log10())
    } else {
        None
    }
}

/// Write a CSV file with a header row; every row must match the header
/// width.
pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), std::io::Error> {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        text.push_str(&row.join(","));
        text.push('\n');
    }
    std::fs::write(path, text)
}

/// One polyline of a plot.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// One panel: labelled axes plus a set of polylines.
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

const PANEL_WIDTH: f64 = 640.0;
const PANEL_HEIGHT: f64 = 300.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 140.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 46.0;

fn bounds(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
    }
    if !x_min.is_finite() {
        return ((0.0, 1.0), (0.0, 1.0));
    }
    if x_min == x_max {
        x_max = x_min + 1.0;
    }
    if y_min == y_max {
        y_max = y_min + 1.0;
    }
    ((x_min, x_max), (y_min, y_max))
}

fn render_panel(svg: &mut String, panel: &Panel, y_offset: f64) {
    let ((x_min, x_max), (y_min, y_max)) = bounds(&panel.series);
    let plot_w = PANEL_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let map_x = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
    let map_y = |y: f64| y_offset + MARGIN_TOP + (1.0 - (y - y_min) / (y_max - y_min)) * plot_h;

    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        y_offset + 18.0,
        panel.title
    );
    // frame
    let _ = writeln!(
        svg,
        r#"<rect x="{:.2}" y="{:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black" stroke-width="1"/>"#,
        MARGIN_LEFT,
        y_offset + MARGIN_TOP,
    );
    // ticks
    for k in 0..=4 {
        let fx = x_min + (x_max - x_min) * k as f64 / 4.0;
        let px = map_x(fx);
        let base = y_offset + MARGIN_TOP + plot_h;
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{base:.2}" x2="{px:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
            base + 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{:.2}" font-size="11" text-anchor="middle">{fx:.3}</text>"#,
            base + 18.0
        );
        let fy = y_min + (y_max - y_min) * k as f64 / 4.0;
        let py = map_y(fy);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN_LEFT:.2}" y2="{py:.2}" stroke="black" stroke-width="1"/>"#,
            MARGIN_LEFT - 5.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{fy:.3}</text>"#,
            MARGIN_LEFT - 8.0,
            py + 4.0
        );
    }
    // axis labels
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        y_offset + PANEL_HEIGHT - 8.0,
        panel.x_label
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        y_offset + MARGIN_TOP + plot_h / 2.0,
        y_offset + MARGIN_TOP + plot_h / 2.0,
        panel.y_label
    );
    // series
    for (i, s) in panel.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        for &(x, y) in s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()) {
            let _ = write!(path, "{:.2},{:.2} ", map_x(x), map_y(y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.trim_end()
        );
        let ly = y_offset + MARGIN_TOP + 14.0 * (i as f64 + 1.0);
        let lx = MARGIN_LEFT + plot_w + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"/>"#,
            ly - 4.0,
            lx + 18.0,
            ly - 4.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{ly:.2}" font-size="11">{}</text>"#,
            lx + 24.0,
            s.label
        );
    }
}

/// Render stacked panels into one static SVG document.
pub fn write_svg(path: &Path, panels: &[Panel]) -> Result<(), std::io::Error> {
    let height = PANEL_HEIGHT * panels.len() as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_WIDTH:.0}" height="{height:.0}" viewBox="0 0 {PANEL_WIDTH:.0} {height:.0}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, panel) in panels.iter().enumerate() {
        render_panel(&mut svg, panel, PANEL_HEIGHT * i as f64);
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)
}
