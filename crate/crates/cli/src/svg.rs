//! Minimal line-chart SVG for output-gap trajectories.
//!
//! The markup is assembled by hand with fixed-precision coordinates, so the
//! same trajectories always yield the same bytes.

use std::fmt::Write as _;
use std::path::Path;

use gapdyn::Trajectory;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 500.0;
/// Fraction of the data range added on each side of both axes.
pub const MARGIN: f64 = 0.05;

const PLOT_LEFT: f64 = 70.0;
const PLOT_RIGHT: f64 = 780.0;
const PLOT_TOP: f64 = 50.0;
const PLOT_BOTTOM: f64 = 450.0;
const TICKS: usize = 5;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

pub const PAPER_TITLE: &str = "Output Gap Dynamics under Different Damping Conditions";

#[derive(Debug, Clone, Copy, PartialEq)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn padded(lo: f64, hi: f64) -> Self {
        let (lo, hi) = if lo.is_finite() && hi.is_finite() {
            (lo, hi)
        } else {
            (0.0, 1.0)
        };
        let span = hi - lo;
        let pad = if span > 0.0 {
            span * MARGIN
        } else {
            lo.abs().max(1.0) * MARGIN
        };
        Range {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn frac(&self, v: f64) -> f64 {
        (v - self.lo) / (self.hi - self.lo)
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(ch),
        }
    }
    out
}

/// Renders `Y(t)` of each trajectory as one polyline, with axes, ticks and
/// a legend. Labels beyond the number of trajectories are ignored; missing
/// labels fall back to `series N`.
pub fn render_svg(trajectories: &[&Trajectory], labels: &[&str], title: &str) -> String {
    let (mut t_lo, mut t_hi, mut y_lo, mut y_hi) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for traj in trajectories {
        for (t, s) in traj.grid().times().zip(traj.states()) {
            t_lo = t_lo.min(t);
            t_hi = t_hi.max(t);
            y_lo = y_lo.min(s.y);
            y_hi = y_hi.max(s.y);
        }
    }
    let xr = Range::padded(t_lo, t_hi);
    let yr = Range::padded(y_lo, y_hi);
    let px = |t: f64| PLOT_LEFT + xr.frac(t) * (PLOT_RIGHT - PLOT_LEFT);
    let py = |y: f64| PLOT_BOTTOM - yr.frac(y) * (PLOT_BOTTOM - PLOT_TOP);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="28" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        escape(title)
    );

    // axes box and ticks
    let _ = writeln!(
        svg,
        r#"<g id="axes" stroke="black" stroke-width="1" fill="none"><line x1="{PLOT_LEFT:.2}" y1="{PLOT_BOTTOM:.2}" x2="{PLOT_RIGHT:.2}" y2="{PLOT_BOTTOM:.2}"/><line x1="{PLOT_LEFT:.2}" y1="{PLOT_TOP:.2}" x2="{PLOT_LEFT:.2}" y2="{PLOT_BOTTOM:.2}"/></g>"#
    );
    svg.push_str(r#"<g id="ticks" font-family="sans-serif" font-size="11">"#);
    svg.push('\n');
    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let (tv, yv) = (xr.lo + f * (xr.hi - xr.lo), yr.lo + f * (yr.hi - yr.lo));
        let (x, y) = (px(tv), py(yv));
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{PLOT_BOTTOM:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{tv:.2}</text>"#,
            PLOT_BOTTOM + 5.0,
            PLOT_BOTTOM + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{PLOT_LEFT:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.3}</text>"#,
            PLOT_LEFT - 5.0,
            PLOT_LEFT - 8.0,
            y + 4.0
        );
    }
    svg.push_str("</g>\n");
    if yr.lo < 0.0 && yr.hi > 0.0 {
        let z = py(0.0);
        let _ = writeln!(
            svg,
            r##"<line id="zero" x1="{PLOT_LEFT:.2}" y1="{z:.2}" x2="{PLOT_RIGHT:.2}" y2="{z:.2}" stroke="#999999" stroke-dasharray="4 3"/>"##
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle">Time</text>"#,
        (PLOT_LEFT + PLOT_RIGHT) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">Output Gap (Y)</text>"#,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0
    );

    for (i, traj) in trajectories.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for (t, s) in traj.grid().times().zip(traj.states()) {
            if !points.is_empty() {
                points.push(' ');
            }
            let _ = write!(points, "{:.2},{:.2}", px(t), py(s.y));
        }
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{points}"/>"#
        );
    }

    svg.push_str(r#"<g id="legend" font-family="sans-serif" font-size="12">"#);
    svg.push('\n');
    for i in 0..trajectories.len() {
        let color = PALETTE[i % PALETTE.len()];
        let label = labels
            .get(i)
            .map_or_else(|| format!("series {}", i + 1), |l| escape(l));
        let y = PLOT_TOP + 14.0 + 18.0 * i as f64;
        let x = PLOT_RIGHT - 160.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{label}</text>"#,
            x + 24.0,
            x + 30.0,
            y + 4.0
        );
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}

pub fn write_svg(
    trajectories: &[&Trajectory],
    labels: &[&str],
    title: &str,
    path: &Path,
) -> std::io::Result<()> {
    std::fs::write(path, render_svg(trajectories, labels, title))
}
