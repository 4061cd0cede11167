//! Minimal SVG line plots of a run: errors, noise, and noise estimates.

use std::fmt::Write as _;
use std::io::Write;

use crate::error::Result;
use crate::harness::ErrorReport;

const WIDTH: f64 = 900.0;
const PANEL_H: f64 = 220.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

struct Series<'a> {
    label: String,
    values: &'a [f64],
}

fn panel(svg: &mut String, top: f64, title: &str, dt: f64, series: &[Series<'_>]) {
    let n = series.iter().map(|s| s.values.len()).max().unwrap_or(0);
    let finite = series.iter().flat_map(|s| s.values.iter().copied()).filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let t_max = (n.max(2) - 1) as f64 * dt;
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = PANEL_H - 2.0 * MARGIN / 2.0;
    let x = |t: f64| MARGIN + plot_w * t / t_max;
    let y = |v: f64| top + MARGIN / 2.0 + plot_h * (hi - v) / (hi - lo);
    let _ = writeln!(
        svg,
        r##"<rect x="{MARGIN}" y="{:.1}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#999"/>"##,
        top + MARGIN / 2.0
    );
    let _ = writeln!(svg, r#"<text x="{MARGIN}" y="{:.1}" font-size="13">{title}</text>"#, top + MARGIN / 2.0 - 6.0);
    let _ = writeln!(svg, r#"<text x="4" y="{:.1}" font-size="10">{hi:.3}</text>"#, y(hi) + 4.0);
    let _ = writeln!(svg, r#"<text x="4" y="{:.1}" font-size="10">{lo:.3}</text>"#, y(lo));
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="10">t = {t_max:.2} s</text>"#,
        WIDTH - MARGIN - 60.0,
        top + PANEL_H - 4.0
    );
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        // Thin out long series to at most ~4 points per pixel column.
        let stride = (s.values.len() / (4 * plot_w as usize)).max(1);
        let mut pts = String::new();
        for (k, v) in s.values.iter().enumerate().step_by(stride) {
            if v.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", x(k as f64 * dt), y(*v));
            }
        }
        let _ =
            writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#, pts.trim_end());
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" fill="{color}">{}</text>"#,
            WIDTH - MARGIN - 150.0,
            top + MARGIN / 2.0 + 14.0 * (i + 1) as f64,
            s.label
        );
    }
}

/// Three stacked panels: `|ḟ − y|` per engine, the noise `η`, and `N̂_k`
/// of every adaptive engine.
pub fn write_report_svg<W: Write>(report: &ErrorReport, mut out: W) -> Result<()> {
    let dt = report.trace.dt;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{}" font-family="sans-serif">"#,
        3.0 * PANEL_H
    );
    let errors: Vec<Series<'_>> =
        report.engines.iter().map(|e| Series { label: e.name.clone(), values: &e.error }).collect();
    panel(&mut svg, 0.0, "differentiation error", dt, &errors);
    let noise: Vec<Series<'_>> = report.trace.noise.iter().map(|v| Series { label: "eta".into(), values: v }).collect();
    panel(&mut svg, PANEL_H, "noise", dt, &noise);
    let n_hat: Vec<Vec<f64>> = report
        .engines
        .iter()
        .filter_map(|e| e.adaptive.as_ref().map(|d| d.iter().map(|x| x.n_hat).collect()))
        .collect();
    let names = report.engines.iter().filter(|e| e.adaptive.is_some()).map(|e| e.name.clone());
    let est: Vec<Series<'_>> =
        n_hat.iter().zip(names).map(|(v, name)| Series { label: format!("{name} N_hat"), values: v }).collect();
    panel(&mut svg, 2.0 * PANEL_H, "noise amplitude estimate", dt, &est);
    svg.push_str("</svg>\n");
    out.write_all(svg.as_bytes())?;
    Ok(())
}
