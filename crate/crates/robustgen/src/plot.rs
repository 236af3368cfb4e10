//! Minimal SVG line/scatter rendering: axes, optional log-scale y, legend.
//! No charting dependency; the output is a pure function of the data, so
//! identical inputs give byte-identical files.

use std::fmt::Write as _;

/// One named polyline.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// A line plot; `log_y` renders y on a log10 axis (nonpositive values are
/// dropped from log plots).
#[derive(Debug, Clone)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn fmt2(v: f64) -> String {
    format!("{v:.2}")
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        format!("1e{v:.1}")
    } else if v != 0.0 && (v.abs() >= 10_000.0 || v.abs() < 0.01) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

impl LinePlot {
    pub fn to_svg(&self) -> String {
        let transform = |y: f64| if self.log_y { y.log10() } else { y };
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                if self.log_y && y <= 0.0 {
                    continue;
                }
                xs.push(x);
                ys.push(transform(y));
            }
        }
        let (x_lo, x_hi) = span(&xs);
        let (y_lo, y_hi) = span(&ys);
        let px = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R);
        let py = |y: f64| HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B);

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );

        // Axes frame.
        let _ = writeln!(
            svg,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            fmt2(MARGIN_L),
            fmt2(MARGIN_T),
            fmt2(WIDTH - MARGIN_L - MARGIN_R),
            fmt2(HEIGHT - MARGIN_T - MARGIN_B)
        );

        // Ticks and grid, five intervals per axis.
        for i in 0..=4 {
            let fx = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
            let x = px(fx);
            let _ = writeln!(
                svg,
                r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#dddddd"/>"##,
                fmt2(x),
                fmt2(MARGIN_T),
                fmt2(HEIGHT - MARGIN_B)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
                fmt2(x),
                fmt2(HEIGHT - MARGIN_B + 18.0),
                tick_label(fx, false)
            );
            let fy = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
            let y = py(fy);
            let _ = writeln!(
                svg,
                r##"<line x1="{0}" y1="{2}" x2="{1}" y2="{2}" stroke="#dddddd"/>"##,
                fmt2(MARGIN_L),
                fmt2(WIDTH - MARGIN_R),
                fmt2(y)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
                fmt2(MARGIN_L - 6.0),
                fmt2(y + 4.0),
                tick_label(fy, self.log_y)
            );
        }

        // Axis labels.
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );

        // Series.
        for (idx, s) in self.series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let mut path = String::new();
            for &(x, y) in &s.points {
                if self.log_y && y <= 0.0 {
                    continue;
                }
                let _ = write!(path, "{},{} ", fmt2(px(x)), fmt2(py(transform(y))));
            }
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
                path.trim_end()
            );
            for &(x, y) in &s.points {
                if self.log_y && y <= 0.0 {
                    continue;
                }
                let _ = writeln!(
                    svg,
                    r#"<circle cx="{}" cy="{}" r="3" fill="{color}"/>"#,
                    fmt2(px(x)),
                    fmt2(py(transform(y)))
                );
            }
        }

        // Legend, top-left inside the frame.
        for (idx, s) in self.series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let y = MARGIN_T + 16.0 + idx as f64 * 16.0;
            let _ = writeln!(
                svg,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="2"/>"#,
                fmt2(MARGIN_L + 8.0),
                fmt2(y - 4.0),
                fmt2(MARGIN_L + 30.0),
                fmt2(y - 4.0)
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
                fmt2(MARGIN_L + 36.0),
                fmt2(y),
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn span(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        // Flat data: widen so the single value sits mid-frame.
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
