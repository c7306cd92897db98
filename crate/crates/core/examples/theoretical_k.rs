//! Gossip depth from the convergence analysis against hand-tuned depths.
//!
//! ```text
//! cargo run --release --example theoretical_k
//! ```

use ndarray::Array1;

use mudag::graph::{build_mixing_matrix, generate_erdos_renyi};
use mudag::mudag::{check_perron_bounds, contraction_matrix, run_mudag, theoretical_k, MudagConfig};
use mudag::objective::{random_quadratic, solve_reference, RandomQuadraticSpec};
use mudag::Error;

fn main() -> mudag::Result<()> {
    let problem = random_quadratic(&RandomQuadraticSpec {
        m: 20,
        d: 10,
        kappa: 100.0,
        heterogeneity: 3.0,
        shift_scale: 1.0,
        seed: 4,
    })?;
    let w = build_mixing_matrix(&generate_erdos_renyi(20, 0.5, 4)?)?;
    let reference = solve_reference(&problem, 1e-12)?.reference();
    let x0 = Array1::zeros(problem.dim());
    let base = MudagConfig::defaults(&problem, 1, 600);
    let tk = theoretical_k(&problem, &w, &base, x0.view(), Some(&reference))?;
    println!(
        "theta={:.4} rho_rate={:.3e} rho_perron={:.3e} K={} (estimate {:.1})",
        tk.theta, tk.rho_rate, tk.rho_perron, tk.k, tk.k_estimate
    );
    let diag = contraction_matrix(tk.rho, problem.constants().m_local, base.eta)?;
    println!("perron value {:.4}, bounds hold: {}", diag.lambda1, check_perron_bounds(&diag, 1e-10).all_hold());

    for k in [1, 2, 3, 4, tk.k] {
        match run_mudag(&problem, &w, &MudagConfig { k, ..base }, x0.view(), Some(&reference)) {
            Ok(run) => match run.trace.first_below(1e-8) {
                Some(r) => println!("K={k:<3} gap 1e-8 at t={:<4} rounds={}", r.t, r.comm_rounds),
                None => println!("K={k:<3} gap 1e-8 not reached"),
            },
            Err(Error::Diverged { t, .. }) => println!("K={k:<3} diverged at t={t}"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
