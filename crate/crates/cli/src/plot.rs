//! Minimal SVG line plots.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 64.0;

#[derive(Debug, Clone)]
pub struct Series {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Half-width of an error bar at each point.
    pub errors: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy)]
pub struct Axes<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub log_x: bool,
    pub log_y: bool,
}

fn scale(v: f64, log: bool) -> f64 {
    if log {
        v.log10()
    } else {
        v
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders one series. Points that cannot be placed (non-finite, or
/// nonpositive on a log axis) are skipped.
pub fn line_plot(series: &Series, axes: Axes) -> String {
    let points: Vec<(f64, f64, f64)> = series
        .xs
        .iter()
        .zip(&series.ys)
        .enumerate()
        .filter(|(_, (x, y))| x.is_finite() && y.is_finite() && (!axes.log_x || **x > 0.0) && (!axes.log_y || **y > 0.0))
        .map(|(i, (&x, &y))| {
            let e = series.errors.as_ref().map_or(0.0, |e| e[i]);
            (scale(x, axes.log_x), y, if e.is_finite() { e } else { 0.0 })
        })
        .collect();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(axes.title)
    );
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN / 2.0, MARGIN / 1.5, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        right - left,
        bottom - top
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        HEIGHT - 16.0,
        escape(axes.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(axes.y_label)
    );
    if points.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }

    let y_of = |y: f64| scale(y, axes.log_y);
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y, e) in &points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        let lo = if axes.log_y && y - e <= 0.0 { y } else { y - e };
        y0 = y0.min(y_of(lo));
        y1 = y1.max(y_of(y + e));
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (right - left);
    let py = |y: f64| bottom - (y_of(y) - y0) / (y1 - y0) * (bottom - top);

    for (i, (lo, hi, px_or_py)) in [(x0, x1, true), (y0, y1, false)].into_iter().enumerate() {
        let log = if i == 0 { axes.log_x } else { axes.log_y };
        for k in 0..=4 {
            let v = lo + (hi - lo) * k as f64 / 4.0;
            let label = if log { format!("1e{v:.1}") } else { format!("{v:.3}") };
            if px_or_py {
                let x = left + (v - x0) / (x1 - x0) * (right - left);
                let _ = writeln!(
                    svg,
                    r#"<text x="{x:.1}" y="{}" text-anchor="middle">{label}</text>"#,
                    bottom + 16.0
                );
            } else {
                let y = bottom - (v - y0) / (y1 - y0) * (bottom - top);
                let _ = writeln!(
                    svg,
                    r#"<text x="{}" y="{:.1}" text-anchor="end">{label}</text>"#,
                    left - 4.0,
                    y + 4.0
                );
            }
        }
    }

    let path: Vec<String> = points.iter().map(|&(x, y, _)| format!("{:.2},{:.2}", px(x), py(y))).collect();
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
        path.join(" ")
    );
    for &(x, y, e) in &points {
        let (cx, cy) = (px(x), py(y));
        if e > 0.0 {
            let lo = if axes.log_y && y - e <= 0.0 { y } else { y - e };
            let _ = writeln!(
                svg,
                r#"<line x1="{cx:.2}" y1="{:.2}" x2="{cx:.2}" y2="{:.2}" stroke="steelblue"/>"#,
                py(lo),
                py(y + e)
            );
        }
        let _ = writeln!(svg, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="steelblue"/>"#);
    }
    svg.push_str("</svg>\n");
    svg
}
