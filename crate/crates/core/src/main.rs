use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mudag::graph::{build_mixing_matrix, spectral_quantities};
use mudag::harness::{
    emit_plot, parse_graph_spec, resolve_output_dir, run_experiment, sweep, ExperimentConfig, PlotAxis,
    SweepAxis, OUTPUT_ROOT_ENV,
};
use mudag::objective::solve_reference;
use mudag::{Error, Result};

#[derive(Parser)]
#[command(name = "mudag", version, about = "Decentralized accelerated optimization simulator")]
#[command(after_help = format!("Relative output directories are placed under ${OUTPUT_ROOT_ENV} when it is set."))]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every method of an experiment config and write traces + manifest.
    Run { config: PathBuf },
    /// Repeat an experiment along one axis and write summary.csv.
    Sweep {
        config: PathBuf,
        /// K, p or sigma
        #[arg(long)]
        axis: SweepAxis,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Print the spectral gap of a network (er:m:p[:seed], ring:m, ..., or an edge-list file).
    Spectrum { graph: String },
    /// Solve the centralized problem of a config to high accuracy.
    SolveRef { config: PathBuf },
    /// Plot all traces in an output directory.
    Plot {
        dir: PathBuf,
        /// grad_evals or comm_rounds
        #[arg(long, default_value = "grad_evals")]
        axis: PlotAxis,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let message = err.to_string().replace('"', "'");
            eprintln!("error kind={} message=\"{message}\"", err.kind());
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = resolve_output_dir(&cfg.run.output_dir);
            let report = run_experiment(&cfg, &out)?;
            let net = &report.manifest.network;
            let c = &report.manifest.constants;
            println!("output {}", out.display());
            println!("network m={} edges={} gap={:.4}", net.m, net.edges, net.gap);
            println!("constants L={:.4e} mu={:.4e} M={:.4e} kappa_g={:.1}", c.l, c.mu, c.m_local, c.kappa_g);
            for m in &report.methods {
                let s = &m.summary;
                for w in &s.warnings {
                    eprintln!("warning: {}: {w}", m.name);
                }
                println!(
                    "{:<6} status={:<8} iters_to_eps={:<6} comm_to_eps={:<7} final_gap={}",
                    m.name,
                    format!("{:?}", s.status.unwrap_or(mudag::harness::MethodStatus::Error)).to_lowercase(),
                    s.iterations_to_eps.map_or("-".into(), |v| v.to_string()),
                    s.comm_to_eps.map_or("-".into(), |v| v.to_string()),
                    s.final_f_gap.map_or("-".into(), |v| format!("{v:.3e}")),
                );
                if let Some(e) = &s.error {
                    eprintln!("{}: {e}", m.name);
                }
            }
            Ok(())
        }
        Command::Sweep { config, axis, values } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = resolve_output_dir(&cfg.run.output_dir);
            let rows = sweep(&cfg, axis, &values, &out)?;
            print!("{}", mudag::harness::summary_csv(&rows));
            Ok(())
        }
        Command::Spectrum { graph } => {
            let g = parse_graph_spec(&graph)?;
            let w = build_mixing_matrix(&g)?;
            let s = spectral_quantities(&w);
            println!("m {}", g.num_agents());
            println!("edges {}", g.num_edges());
            println!("lambda2 {:.12}", s.lambda2);
            println!("gap {:.12}", s.gap);
            println!("fastmix_base {:.12}", s.contraction_base());
            Ok(())
        }
        Command::SolveRef { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let (g, _) = cfg.build_network()?;
            let p = cfg.build_problem(g.num_agents())?;
            let sol = solve_reference(&p, cfg.run.reference_tol)?;
            println!("f_star {:e}", sol.f_star);
            println!("grad_norm {:e}", sol.grad_norm);
            println!("iterations {}", sol.iterations);
            let x: Vec<String> = sol.x_star.iter().map(|v| format!("{v:e}")).collect();
            println!("x_star {}", x.join(","));
            Ok(())
        }
        Command::Plot { dir, axis } => {
            if !dir.is_dir() {
                return Err(Error::InvalidInput(format!("{} is not a directory", dir.display())));
            }
            let path = emit_plot(&dir, axis)?;
            println!("{}", path.display());
            Ok(())
        }
    }
}
