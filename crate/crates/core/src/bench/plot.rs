//! Minimal SVG line charts.

use std::collections::BTreeMap;
use std::fmt::Write;

use super::harness::{BlockRow, SpeedupRow};

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

/// Series of `(x, y)` points keyed by label. `x` is plotted on a log2 axis.
fn chart(title: &str, x_label: &str, y_label: &str, series: &BTreeMap<String, Vec<(f64, f64)>>) -> String {
    let points = series.values().flatten();
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in points {
        x0 = x0.min(x.log2());
        x1 = x1.max(x.log2());
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let y1 = if y1 > 0.0 { y1 * 1.1 } else { 1.0 };
    let px = |x: f64| MARGIN + (x.log2() - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - y / y1 * (H - 2.0 * MARGIN);

    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0).unwrap();
    writeln!(
        out,
        r#"<path d="M{m} {t} L{m} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    )
    .unwrap();
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, W / 2.0, H - 12.0).unwrap();
    writeln!(out, r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">{y_label}</text>"#, H / 2.0, H / 2.0)
        .unwrap();
    for i in 0..=4 {
        let y = y1 * i as f64 / 4.0;
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{y:.2}</text>"#, MARGIN - 4.0, py(y) + 4.0).unwrap();
    }
    let mut ticks: Vec<f64> = series.values().flatten().map(|p| p.0).collect();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for x in ticks {
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{x}</text>"#, px(x), H - MARGIN + 16.0).unwrap();
    }
    for (i, (label, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let d: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y))).collect();
        writeln!(out, r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="2"/>"#, d.join(" ")).unwrap();
        let ly = MARGIN + 16.0 * i as f64;
        writeln!(out, r#"<text x="{}" y="{ly}" fill="{color}">{label}</text>"#, W - MARGIN - 150.0).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Improvement factor against block count, one line per fixture variant.
pub fn improvement_svg(rows: &[BlockRow]) -> String {
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        series.entry(format!("{} {}", r.fixture, r.variant)).or_default().push((r.blocks as f64, r.improvement));
    }
    chart("Improvement factor", "blocks", "t_reference / t_blocked", &series)
}

/// Speedup against worker count.
pub fn speedup_svg(rows: &[SpeedupRow]) -> String {
    let mut series: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        let kind = if r.cache_blocked { "blocked" } else { "plain" };
        series.entry(format!("{} {kind}", r.fixture)).or_default().push((r.workers as f64, r.speedup));
    }
    chart("Speedup", "workers", "t_serial / t_parallel", &series)
}
