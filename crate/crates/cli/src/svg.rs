//! Minimal self-contained SVG line chart of coefficient trajectories.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const LEGEND_MAX: usize = 20;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders one trajectory per series against `lambdas` on a log axis, with
/// the largest penalty on the left.
pub fn render(title: &str, lambdas: &[f64], series: &[(String, Vec<f64>)]) -> String {
    let logs: Vec<f64> = lambdas.iter().map(|l| l.log10()).collect();
    let (mut lo, mut hi) = logs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 0.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let (mut ymin, mut ymax) = series
        .iter()
        .flat_map(|(_, v)| v.iter())
        .fold((0.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    if ymax - ymin < 1e-12 {
        ymin -= 1.0;
        ymax += 1.0;
    }
    let pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    // Decreasing λ runs left to right.
    let px = |l: f64| LEFT + (hi - l) / (hi - lo) * plot_w;
    let py = |v: f64| TOP + (ymax - v) / (ymax - ymin) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, LEFT + plot_w / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    for i in 0..=4 {
        let l = hi - (hi - lo) * i as f64 / 4.0;
        let x = px(l);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{y1:.2}" stroke="black"/><text x="{x:.2}" y="{ty:.2}" text-anchor="middle">{label:.3e}</text>"#,
            y0 = TOP + plot_h,
            y1 = TOP + plot_h + 5.0,
            ty = TOP + plot_h + 18.0,
            label = 10f64.powf(l),
        );
        let v = ymax - (ymax - ymin) * i as f64 / 4.0;
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<line x1="{x0:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{tx:.2}" y="{ty:.2}" text-anchor="end">{v:.3}</text>"#,
            x0 = LEFT - 5.0,
            tx = LEFT - 8.0,
            ty = y + 4.0,
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">lambda (log scale)</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 8.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{y}" text-anchor="middle" transform="rotate(-90 16 {y})">coefficient</text>"#,
        y = TOP + plot_h / 2.0
    );
    let zero = py(0.0);
    let _ = writeln!(
        s,
        r##"<line x1="{LEFT}" y1="{zero:.2}" x2="{:.2}" y2="{zero:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
        LEFT + plot_w
    );

    for (i, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = logs
            .iter()
            .zip(values)
            .map(|(&l, &v)| format!("{:.2},{:.2}", px(l), py(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
            points.join(" "),
            escape(name)
        );
        if i < LEGEND_MAX {
            let y = TOP + 10.0 + 16.0 * i as f64;
            let x = WIDTH - RIGHT + 12.0;
            let _ = writeln!(
                s,
                r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
                x + 18.0,
                x + 24.0,
                y + 4.0,
                escape(name)
            );
        }
    }
    if series.len() > LEGEND_MAX {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">+{} more</text>"#,
            WIDTH - RIGHT + 12.0,
            TOP + 14.0 + 16.0 * LEGEND_MAX as f64,
            series.len() - LEGEND_MAX
        );
    }
    s.push_str("</svg>\n");
    s
}
