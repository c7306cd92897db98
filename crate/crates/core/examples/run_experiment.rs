//! Config-driven experiment: traces, manifest and plot in one directory.
//!
//! ```text
//! cargo run --release --example run_experiment [output-dir]
//! ```

use std::path::{Path, PathBuf};

use mudag::harness::{emit_plot, run_experiment, ExperimentConfig, PlotAxis};

const CONFIG: &str = r#"
[network]
topology = "er"
m = 20
p = 0.4
seed = 1

[problem]
family = "logistic"
n_per_agent = 40
d = 10
seed = 1

[run]
T = 400
eps = 1e-8

[method.mudag]
k_mode = "tuned"
K_values = [1, 2, 3, 4]

[method.agd]
[method.extra]
[method.nids]
"#;

fn main() -> mudag::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("mudag-example"));
    let cfg = ExperimentConfig::parse(CONFIG, Path::new("inline.toml"))?;
    let report = run_experiment(&cfg, &out)?;
    for m in &report.methods {
        println!("{:<6} {:?} iterations to eps {:?}", m.name, m.summary.status, m.summary.iterations_to_eps);
    }
    println!("plot: {}", emit_plot(&out, PlotAxis::GradEvals)?.display());
    Ok(())
}
