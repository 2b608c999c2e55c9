//! Minimal line plots.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const PAD: f64 = 60.0;

fn label(v: f64) -> String {
    format!("{v:.4e}")
}

/// A single polyline of `(xs, ys)` with axes and extreme-value labels. Non-finite points
/// are dropped.
pub fn line_plot(title: &str, x_label: &str, xs: &[f64], ys: &[f64]) -> String {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(x, y)| (*x, *y))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        let pad = if y0 == 0.0 { 1.0 } else { 0.5 * y0.abs() };
        (y0, y1) = (y0 - pad, y1 + pad);
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        W / 2.0,
        escape(title)
    );
    let (left, right, top, bottom) = (PAD, W - PAD, PAD, H - PAD);
    let _ = writeln!(
        s,
        r#"<path d="M {left} {top} L {left} {bottom} L {right} {bottom}" stroke="black" fill="none"/>"#
    );
    let small = r#"font-family="sans-serif" font-size="11""#;
    let _ = writeln!(
        s,
        r#"<text x="{left}" y="{}" {small}>{}</text>"#,
        bottom + 16.0,
        label(x0)
    );
    let _ = writeln!(
        s,
        r#"<text x="{right}" y="{}" {small} text-anchor="end">{}</text>"#,
        bottom + 16.0,
        label(x1)
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" {small} text-anchor="middle">{}</text>"#,
        W / 2.0,
        bottom + 32.0,
        escape(x_label)
    );
    let _ = writeln!(s, r#"<text x="4" y="{bottom}" {small}>{}</text>"#, label(y0));
    let _ = writeln!(s, r#"<text x="4" y="{}" {small}>{}</text>"#, top + 4.0, label(y1));
    let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" stroke="steelblue" stroke-width="1.5" fill="none"/>"#,
        coords.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
