//! Static log-log SVG of an empirical DSFF against theory.
//!
//! Output is a pure function of the rows, with fixed decimal formatting, so
//! identical inputs give identical files.

use std::fmt::Write;

use crate::table::CompareRow;

const WIDTH: f64 = 820.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

struct Axes {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x.log10() - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y.log10() - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn positive(v: Option<f64>) -> Option<f64> {
    v.filter(|x| x.is_finite() && *x > 0.0)
}

fn decade_bounds(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return None;
    }
    let (lo, hi) = (lo.log10().floor(), hi.log10().ceil());
    Some((lo, if hi > lo { hi } else { lo + 1.0 }))
}

fn polyline(svg: &mut String, axes: &Axes, points: &[(f64, f64)], color: &str, dash: &str) {
    // Break the line wherever a value is missing or non-positive.
    let mut segment = String::new();
    let mut flush = |segment: &mut String| {
        if segment.contains(' ') {
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.6"{dash} points="{}"/>"#,
                segment.trim_end()
            );
        }
        segment.clear();
    };
    for &(x, y) in points {
        if x > 0.0 && y > 0.0 && y.is_finite() {
            let _ = write!(segment, "{:.2},{:.2} ", axes.px(x), axes.py(y));
        } else {
            flush(&mut segment);
        }
    }
    flush(&mut segment);
}

fn markers(svg: &mut String, axes: &Axes, rows: &[CompareRow], value: impl Fn(&CompareRow) -> Option<f64>, color: &str) {
    for r in rows.iter().filter(|r| r.abs_tau > 0.0) {
        let Some(y) = positive(value(r)) else { continue };
        let x = axes.px(r.abs_tau);
        if let Some(se) = r.k_stderr.filter(|se| *se > 0.0) {
            let lo = (y - se).max(10f64.powf(axes.y0));
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}" stroke-width="1"/>"#,
                axes.py(lo),
                axes.py(y + se)
            );
        }
        let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, axes.py(y));
    }
}

/// Renders the chart. With `subtract_disconnected`, the connected parts
/// (empirical and theory) are drawn as well.
pub fn render(rows: &[CompareRow], title: &str, subtract_disconnected: bool) -> String {
    let xs = rows.iter().map(|r| r.abs_tau).filter(|x| *x > 0.0);
    let mut ys: Vec<f64> = rows
        .iter()
        .filter(|r| r.abs_tau > 0.0)
        .flat_map(|r| [positive(Some(r.k_mean)), positive(Some(r.k_total))])
        .flatten()
        .collect();
    if subtract_disconnected {
        ys.extend(
            rows.iter()
                .filter(|r| r.abs_tau > 0.0)
                .flat_map(|r| [positive(r.connected), positive(r.theory_connected)])
                .flatten(),
        );
    }
    let (Some((x0, x1)), Some((y0, y1))) = (decade_bounds(xs), decade_bounds(ys.into_iter())) else {
        return empty_chart(title);
    };
    let axes = Axes { x0, x1, y0, y1 };

    let mut svg = header(title);
    let (plot_l, plot_r, plot_t, plot_b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<rect x="{plot_l}" y="{plot_t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        plot_r - plot_l,
        plot_b - plot_t
    );
    for k in (x0 as i32)..=(x1 as i32) {
        let x = axes.px(10f64.powi(k));
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{plot_t}" x2="{x:.2}" y2="{plot_b}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">10<tspan dy="-6" font-size="9">{k}</tspan></text>"##,
            plot_b + 18.0
        );
    }
    for k in (y0 as i32)..=(y1 as i32) {
        let y = axes.py(10f64.powi(k));
        let _ = writeln!(
            svg,
            r##"<line x1="{plot_l}" y1="{y:.2}" x2="{plot_r}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">10<tspan dy="-6" font-size="9">{k}</tspan></text>"##,
            plot_l - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">|τ|</text>"#,
        (plot_l + plot_r) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">K(τ)</text>"#,
        (plot_t + plot_b) / 2.0,
        (plot_t + plot_b) / 2.0
    );

    let theory: Vec<(f64, f64)> = rows.iter().map(|r| (r.abs_tau, r.k_total)).collect();
    polyline(&mut svg, &axes, &theory, "black", "");
    markers(&mut svg, &axes, rows, |r| Some(r.k_mean), "#1f5fbf");
    let mut legend = vec![("black", "theory K", false), ("#1f5fbf", "empirical K", true)];
    if subtract_disconnected {
        let conn: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r.abs_tau, r.theory_connected.unwrap_or(f64::NAN)))
            .collect();
        polyline(&mut svg, &axes, &conn, "#b22222", r#" stroke-dasharray="6 4""#);
        markers(&mut svg, &axes, rows, |r| r.connected, "#e08020");
        legend.push(("#b22222", "theory connected", false));
        legend.push(("#e08020", "empirical connected", true));
    }
    for (k, (color, label, dot)) in legend.iter().enumerate() {
        let y = plot_t + 20.0 + 22.0 * k as f64;
        let x = plot_r + 16.0;
        if *dot {
            let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#, x + 12.0);
        } else {
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="1.6"/>"#,
                x + 24.0
            );
        }
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}">{label}</text>"#, x + 32.0, y + 4.0);
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    )
}

fn empty_chart(title: &str) -> String {
    let mut svg = header(title);
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">no positive data to plot</text>"#,
        WIDTH / 2.0,
        HEIGHT / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}
