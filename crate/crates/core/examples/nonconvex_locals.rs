//! Same averaged objective, convex and non-convex splits across agents.
//!
//! ```text
//! cargo run --release --example nonconvex_locals
//! ```

use mudag::baselines::{tune_step_size, BaselineConfig, BaselineMethod};
use mudag::consensus::IterateBlock;
use mudag::graph::{build_mixing_matrix, generate_erdos_renyi};
use mudag::mudag::{run_mudag, MudagConfig};
use mudag::objective::{logistic_problem, solve_reference, synthetic_logistic, SyntheticSpec};
use mudag::Error;

fn main() -> mudag::Result<()> {
    let (m, sigma, eps, t) = (20, 1e-4, 1e-6, 1500);
    let shards = synthetic_logistic(&SyntheticSpec {
        m,
        n_per_agent: 50,
        d: 20,
        noise: 0.1,
        seed: 3,
    })?;
    let w = build_mixing_matrix(&generate_erdos_renyi(m, 0.5, 3)?)?;
    let mut split = vec![-1e-2; m];
    split[m - 1] = m as f64 * sigma + (m - 1) as f64 * 1e-2;

    for (label, sigmas) in [("convex", vec![sigma; m]), ("nonconvex", split)] {
        let problem = logistic_problem(&shards, &sigmas)?;
        let reference = solve_reference(&problem, 1e-10)?.reference();
        let c = problem.constants();
        println!("{label}: L={:.3e} mu={:.3e} M={:.3e}", c.l, c.mu, c.m_local);
        let x0 = IterateBlock::zeros(m, problem.dim());
        let cfg = MudagConfig::defaults(&problem, 3, t);
        let run = run_mudag(&problem, &w, &cfg, x0.mean_row().view(), Some(&reference))?;
        let hit = run.trace.first_below_relative(eps).map(|r| r.t);
        println!("  mudag  iterations to {eps:e}: {hit:?}");
        for method in [BaselineMethod::Extra, BaselineMethod::Nids] {
            let template = BaselineConfig::new(method, 0.0, t);
            match tune_step_size(&problem, &w, &template, &x0, &reference, 8, eps) {
                Ok(tuned) => println!(
                    "  {:<6} iterations to {eps:e}: {:?} (eta {:.2e})",
                    method.name(),
                    tuned.run.trace.first_below_relative(eps).map(|r| r.t),
                    tuned.eta
                ),
                Err(Error::Diverged { t, .. }) => println!("  {:<6} diverged at t={t}", method.name()),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}
