//! Mudag and the baselines on regularized logistic regression.
//!
//! ```text
//! cargo run --release --example logistic_benchmark
//! ```

use mudag::baselines::{run_baseline, tune_step_size, BaselineConfig, BaselineMethod};
use mudag::consensus::IterateBlock;
use mudag::graph::{build_mixing_matrix, generate_erdos_renyi};
use mudag::mudag::{run_mudag, MudagConfig};
use mudag::objective::{logistic_problem, solve_reference, synthetic_logistic, SyntheticSpec};
use mudag::trace::Trace;

fn report(name: &str, trace: &Trace, eps: f64) {
    match trace.first_below_relative(eps) {
        Some(r) => println!("{name:<6} grads {:>6} rounds {:>6}", r.grad_evals, r.comm_rounds),
        None => println!("{name:<6} not reached, final gap {:.3e}", trace.last().and_then(|r| r.f_gap).unwrap_or(f64::NAN)),
    }
}

fn main() -> mudag::Result<()> {
    let m = 30;
    let shards = synthetic_logistic(&SyntheticSpec {
        m,
        n_per_agent: 60,
        d: 20,
        noise: 0.1,
        seed: 2,
    })?;
    let problem = logistic_problem(&shards, &vec![1e-3; m])?;
    let w = build_mixing_matrix(&generate_erdos_renyi(m, 0.3, 2)?)?;
    let reference = solve_reference(&problem, 1e-10)?.reference();
    let (eps, t) = (1e-8, 2000);
    let x0 = IterateBlock::zeros(m, problem.dim());
    println!("iterations to relative gap {eps:e}");

    let cfg = MudagConfig::defaults(&problem, 3, t);
    let run = run_mudag(&problem, &w, &cfg, x0.mean_row().view(), Some(&reference))?;
    report("mudag", &run.trace, eps);

    let agd = BaselineConfig::new(BaselineMethod::Agd, 1.0 / problem.constants().l, t);
    report("agd", &run_baseline(&problem, &w, &agd, &x0, Some(&reference))?.trace, eps);
    for method in [BaselineMethod::Dgd, BaselineMethod::Extra, BaselineMethod::Nids] {
        let template = BaselineConfig::new(method, 0.0, t);
        let tuned = tune_step_size(&problem, &w, &template, &x0, &reference, 6, eps)?;
        report(method.name(), &tuned.run.trace, eps);
    }
    Ok(())
}
