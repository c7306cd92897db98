//! Mudag on a heterogeneous quadratic, with the Lyapunov value along the run.
//!
//! ```text
//! cargo run --release --example mudag_quadratic
//! ```

use ndarray::Array1;

use mudag::graph::{build_mixing_matrix, generate_erdos_renyi};
use mudag::mudag::{run_mudag, MudagConfig};
use mudag::objective::{random_quadratic, solve_reference, RandomQuadraticSpec};

fn main() -> mudag::Result<()> {
    let problem = random_quadratic(&RandomQuadraticSpec {
        m: 20,
        d: 10,
        kappa: 100.0,
        heterogeneity: 3.0,
        shift_scale: 1.0,
        seed: 1,
    })?;
    let w = build_mixing_matrix(&generate_erdos_renyi(20, 0.5, 1)?)?;
    let reference = solve_reference(&problem, 1e-12)?.reference();
    let cfg = MudagConfig::defaults(&problem, 3, 200);
    let run = run_mudag(&problem, &w, &cfg, Array1::zeros(problem.dim()).view(), Some(&reference))?;
    println!("eta={:.4e} alpha={:.4} K={}", cfg.eta, cfg.alpha, cfg.k);
    println!("{:>5} {:>12} {:>12} {:>12}", "t", "f gap", "consensus", "V");
    for r in run.trace.iter().step_by(20) {
        println!(
            "{:>5} {:>12.3e} {:>12.3e} {:>12.3e}",
            r.t,
            r.f_gap.unwrap_or(f64::NAN),
            r.consensus_err,
            r.v_t.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
