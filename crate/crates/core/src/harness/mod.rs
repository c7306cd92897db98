//! Experiment orchestration: TOML configs, multi-method runs with CSV traces
//! and a manifest, one-axis sweeps, and SVG plots.

mod config;
mod experiment;
mod plot;

use std::path::{Path, PathBuf};

pub use config::{
    BaselineMethodConfig, DataSource, ExperimentConfig, FamilyKind, FormKind, KMode, MethodsConfig,
    MudagMethodConfig, NetworkConfig, ProblemConfig, RunConfig, SigmaConfig, SigmaMode, TopologyKind,
};
pub use experiment::{
    apply_axis, gap_at_budget, run_experiment, summary_csv, sweep, ConstantsSummary, ExperimentReport,
    Manifest, MethodOutcome, MethodStatus, MethodSummary, NetworkSummary, ReferenceSummary, Seeds, Setup,
    SweepAxis, SweepRow, DEGRADED_FACTOR, MANIFEST_FILE, SUMMARY_FILE, SUMMARY_HEADER,
};
pub use plot::{collect_traces, emit_plot, render_svg, series, PlotAxis};

use crate::graph::{generate_erdos_renyi, generate_named, Graph, Topology};
use crate::{Error, Result};

/// Environment variable naming the root directory for relative outputs.
pub const OUTPUT_ROOT_ENV: &str = "MUDAG_OUTPUT_ROOT";

/// Resolves a configured output directory against [`OUTPUT_ROOT_ENV`].
pub fn resolve_output_dir(configured: &Path) -> PathBuf {
    if configured.is_absolute() {
        return configured.to_path_buf();
    }
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if !root.is_empty() => PathBuf::from(root).join(configured),
        _ => configured.to_path_buf(),
    }
}

/// Parses a compact network description: `er:<m>:<p>[:<seed>]`,
/// `ring:<m>`, `path:<m>`, `complete:<m>`, `star:<m>`, or an edge-list path.
pub fn parse_graph_spec(spec: &str) -> Result<Graph> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::InvalidInput(format!("cannot parse graph spec `{spec}`"));
    let int = |s: &str| s.parse::<usize>().map_err(|_| bad());
    match parts.as_slice() {
        ["er", m, p] => generate_erdos_renyi(int(m)?, p.parse().map_err(|_| bad())?, 0),
        ["er", m, p, seed] => generate_erdos_renyi(
            int(m)?,
            p.parse().map_err(|_| bad())?,
            seed.parse().map_err(|_| bad())?,
        ),
        [name, m] if name.parse::<Topology>().is_ok() => generate_named(name.parse()?, int(m)?),
        _ if Path::new(spec).exists() => Graph::read_edge_list(spec),
        _ => Err(bad()),
    }
}
