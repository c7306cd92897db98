//! Deterministic SVG line plots of `f(x̄_t) − f*` on a log scale.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::trace::Trace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotAxis {
    GradEvals,
    CommRounds,
}

impl PlotAxis {
    pub fn name(self) -> &'static str {
        match self {
            PlotAxis::GradEvals => "grad_evals",
            PlotAxis::CommRounds => "comm_rounds",
        }
    }
}

impl std::str::FromStr for PlotAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grad_evals" => Ok(PlotAxis::GradEvals),
            "comm_rounds" => Ok(PlotAxis::CommRounds),
            other => Err(Error::InvalidInput(format!(
                "unknown plot axis `{other}` (expected grad_evals or comm_rounds)"
            ))),
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
/// Gaps below this are drawn at the floor.
const GAP_FLOOR: f64 = 1e-16;
const COLORS: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// `(x, f_gap)` pairs of a trace along `axis`, skipping records without a gap.
pub fn series(trace: &Trace, axis: PlotAxis) -> Vec<(f64, f64)> {
    trace
        .iter()
        .filter_map(|r| {
            let x = match axis {
                PlotAxis::GradEvals => r.grad_evals,
                PlotAxis::CommRounds => r.comm_rounds,
            } as f64;
            r.f_gap.map(|g| (x, g.max(GAP_FLOOR)))
        })
        .collect()
}

/// Renders named traces into one SVG document.
pub fn render_svg(traces: &[(String, Trace)], axis: PlotAxis) -> Result<String> {
    if traces.is_empty() {
        return Err(Error::InvalidInput("plot needs at least one trace".into()));
    }
    let mut all = Vec::new();
    for (name, trace) in traces {
        if trace.is_empty() {
            return Err(Error::InvalidInput(format!("trace `{name}` is empty")));
        }
        all.push(series(trace, axis));
    }
    let points = all.iter().flatten();
    let x_max = points.clone().map(|p| p.0).fold(0.0, f64::max).max(1.0);
    let (lo, hi) = points.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.1), hi.max(p.1))
    });
    if !lo.is_finite() {
        return Err(Error::InvalidInput("traces carry no objective gap".into()));
    }
    let y_lo = lo.log10().floor();
    let y_hi = hi.log10().ceil().max(y_lo + 1.0);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + plot_w * x / x_max;
    let sy = |g: f64| TOP + plot_h * (y_hi - g.log10()) / (y_hi - y_lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );

    // decades on the y axis, thinned to at most ~10 labels
    let decades = (y_hi - y_lo) as i64;
    let stride = (decades / 10 + 1).max(1);
    let mut e = y_lo as i64;
    while e <= y_hi as i64 {
        let y = sy(10f64.powi(e as i32));
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
        e += stride;
    }
    for k in 0..=4 {
        let v = x_max * k as f64 / 4.0;
        let x = sx(v);
        let _ = writeln!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 16.0,
            v.round()
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        axis.name()
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">f(x̄) − f*</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    for (i, ((name, _), pts)) in traces.iter().zip(&all).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, g)| format!("{:.2},{:.2}", sx(x), sy(g)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = LEFT + plot_w + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
            ly - 4.0,
            lx + 18.0,
            ly - 4.0
        );
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#, lx + 24.0, escape(name));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Trace CSVs of an output directory, sorted by file name.
pub fn collect_traces(dir: &Path) -> Result<Vec<(String, Trace)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|e| e == "csv")
                && p.file_name().is_some_and(|n| n != super::experiment::SUMMARY_FILE)
        })
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let trace = Trace::read_csv(&p)?;
            if trace.is_empty() {
                return Err(Error::InvalidInput(format!("{}: empty trace file", p.display())));
            }
            Ok((name, trace))
        })
        .collect()
}

/// Plots every trace in `dir` and writes `<dir>/<axis>.svg`.
pub fn emit_plot(dir: &Path, axis: PlotAxis) -> Result<PathBuf> {
    let traces = collect_traces(dir)?;
    if traces.is_empty() {
        return Err(Error::InvalidInput(format!("no trace files in {}", dir.display())));
    }
    let svg = render_svg(&traces, axis)?;
    let out = dir.join(format!("{}.svg", axis.name()));
    fs::write(&out, svg)?;
    Ok(out)
}
