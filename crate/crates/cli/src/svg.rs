//! Minimal SVG line and heat-map writers. CSV stays the source of truth;
//! these are previews only.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn bounds<'a>(vals: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = vals.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(s: &mut String, title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) {
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}" text-anchor="start">{:.4}</text>"#, H - PAD + 16.0, x.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#, W - PAD, H - PAD + 16.0, x.1);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#, PAD - 4.0, H - PAD, y.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{:.4}</text>"#, PAD - 4.0, PAD + 10.0, y.1);
}

pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[(&[f64], &[f64])]) -> String {
    let x = bounds(series.iter().flat_map(|s| s.0.iter()));
    let y = bounds(series.iter().flat_map(|s| s.1.iter()));
    let px = |v: f64| PAD + (v - x.0) / (x.1 - x.0) * (W - 2.0 * PAD);
    let py = |v: f64| H - PAD - (v - y.0) / (y.1 - y.0) * (H - 2.0 * PAD);
    let mut s = String::new();
    frame(&mut s, title, xlabel, ylabel, x, y);
    for (k, (xs, ys)) in series.iter().enumerate() {
        let pts: Vec<String> = xs
            .iter()
            .zip(ys.iter())
            .filter(|(a, b)| a.is_finite() && b.is_finite())
            .map(|(&a, &b)| format!("{:.2},{:.2}", px(a), py(b)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#, COLORS[k % COLORS.len()], pts.join(" "));
    }
    s.push_str("</svg>\n");
    s
}

/// Diverging map: blue below zero, red above, white at zero.
pub fn heatmap(title: &str, xs: &[f64], ys: &[f64], values: &[f64]) -> String {
    let x = bounds(xs.iter());
    let y = bounds(ys.iter());
    let scale = values.iter().filter(|v| v.is_finite()).fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let cw = (W - 2.0 * PAD) / xs.len().max(1) as f64;
    let ch = (H - 2.0 * PAD) / ys.len().max(1) as f64;
    let mut s = String::new();
    frame(&mut s, title, "x", "y", x, y);
    for (j, _) in ys.iter().enumerate() {
        for (i, _) in xs.iter().enumerate() {
            let v = values[j * xs.len() + i] / scale;
            let v = if v.is_finite() { v.clamp(-1.0, 1.0) } else { 0.0 };
            let fade = |c: f64| (255.0 * (1.0 - c)).round() as u8;
            let (r, g, b) = if v >= 0.0 { (255, fade(v), fade(v)) } else { (fade(-v), fade(-v), 255) };
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({r},{g},{b})"/>"#,
                PAD + i as f64 * cw,
                H - PAD - (j + 1) as f64 * ch,
                cw + 0.05,
                ch + 0.05
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
