//! Minimal SVG bar-outline plot of variance histograms.

use std::fmt::Write as _;

use gradvar_core::metrics::VarianceHistogram;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Overlays step outlines of several histograms that share bin edges. Each
/// series is drawn once for `v_x` (solid) and once for `v_y` (dashed).
pub fn histogram_svg(title: &str, series: &[(&str, &VarianceHistogram)]) -> String {
    let bins = series.first().map_or(0, |(_, h)| h.counts_x.len());
    let peak = series
        .iter()
        .flat_map(|(_, h)| h.counts_x.iter().chain(&h.counts_y))
        .copied()
        .max()
        .unwrap_or(0)
        .max(1) as f64;
    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let x_at = |k: usize| MARGIN + plot_w * k as f64 / bins.max(1) as f64;
    let y_at = |c: usize| HEIGHT - MARGIN - plot_h * c as f64 / peak;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<path d="M{MARGIN},{MARGIN} V{} H{}" stroke="black" fill="none"/>"#,
        HEIGHT - MARGIN,
        WIDTH - MARGIN
    );
    if let Some((_, h)) = series.first() {
        let lo = h.edges.first().copied().unwrap_or(0.0);
        let hi = h.edges.last().copied().unwrap_or(0.0);
        let _ = writeln!(
            svg,
            r#"<text x="{MARGIN}" y="{}" text-anchor="start">{lo:.1e}</text>"#,
            HEIGHT - MARGIN + 16.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{hi:.1e}</text>"#,
            WIDTH - MARGIN,
            HEIGHT - MARGIN + 16.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">patch variance (log scale)</text>"#,
            WIDTH / 2.0,
            HEIGHT - 12.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end">{peak}</text>"#,
        MARGIN - 4.0,
        MARGIN + 4.0
    );

    for (i, (name, h)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        for (counts, dash) in [(&h.counts_x, ""), (&h.counts_y, r#" stroke-dasharray="5,3""#)] {
            let mut d = format!("M{:.2},{:.2}", x_at(0), y_at(0));
            for (k, &c) in counts.iter().enumerate() {
                let _ = write!(d, " V{:.2} H{:.2}", y_at(c), x_at(k + 1));
            }
            let _ = write!(d, " V{:.2}", y_at(0));
            let _ = writeln!(
                svg,
                r#"<path d="{d}" stroke="{color}" fill="none"{dash}/>"#
            );
        }
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{ly}" fill="{color}" text-anchor="end">{} (solid v_x, dashed v_y)</text>"#,
            WIDTH - MARGIN - 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
