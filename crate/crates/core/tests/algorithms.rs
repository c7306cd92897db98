use ndarray::{array, Array1, Array2};

use mudag::baselines::{
    default_momentum, run_agd, run_baseline, run_dgd, run_extra, run_nids, BaselineConfig, BaselineMethod,
};
use mudag::consensus::{consensus_error, fastmix, IterateBlock};
use mudag::graph::{build_mixing_matrix, generate_erdos_renyi, generate_named, MixingMatrix, Topology};
use mudag::mudag::{
    mudag_step, run_mudag, theoretical_k, theta, Form, MudagConfig, MudagState,
};
use mudag::objective::{quadratic_problem, random_quadratic, solve_reference, Problem, RandomQuadraticSpec};
use mudag::trace::Reference;
use mudag::Error;

fn ring(m: usize) -> MixingMatrix {
    build_mixing_matrix(&generate_named(Topology::Ring, m).unwrap()).unwrap()
}

fn quadratic(m: usize, kappa: f64, het: f64, seed: u64) -> Problem {
    random_quadratic(&RandomQuadraticSpec {
        m,
        d: 4,
        kappa,
        heterogeneity: het,
        shift_scale: 1.0,
        seed,
    })
    .unwrap()
}

fn reference(p: &Problem) -> Reference {
    solve_reference(p, 1e-12).unwrap().reference()
}

fn grad_evals_to(trace: &mudag::trace::Trace, eps: f64) -> Option<u64> {
    trace.first_below(eps).map(|r| r.grad_evals)
}

#[test]
fn agd_first_step_is_a_gradient_step() {
    // f(x) = ½‖x‖² on one agent: x₁ = x₀ − η x₀
    let p = quadratic_problem(vec![Array2::eye(2)], vec![Array1::zeros(2)]).unwrap();
    let cfg = BaselineConfig::new(BaselineMethod::Agd, 0.25, 1);
    let run = run_agd(&p, &cfg, array![4.0, -2.0].view(), None).unwrap();
    assert_eq!(run.mean(), array![3.0, -1.5]);
}

#[test]
fn agd_converges_at_the_accelerated_rate() {
    let p = quadratic(5, 100.0, 0.0, 1);
    let r = reference(&p);
    let c = *p.constants();
    let cfg = BaselineConfig::new(BaselineMethod::Agd, 1.0 / c.l, 300);
    let x0 = Array1::from_elem(p.dim(), 3.0);
    let run = run_agd(&p, &cfg, x0.view(), Some(&r)).unwrap();
    let rate = 1.0 - (c.mu / c.l).sqrt() / 2.0;
    let burn = run.trace.iter().nth(5).unwrap().f_gap.unwrap();
    for rec in run.trace.iter().skip(5).take_while(|rec| rec.f_gap.unwrap() > 1e-13) {
        let bound = burn * rate.powi(rec.t as i32 - 5) * 10.0;
        assert!(rec.f_gap.unwrap() <= bound, "t={} gap {:e} bound {bound:e}", rec.t, rec.f_gap.unwrap());
    }
    assert!(run.trace.last().unwrap().f_gap.unwrap() < 1e-10);
}

#[test]
fn dgd_stalls_at_a_nonzero_plateau() {
    let p = quadratic(8, 10.0, 1.0, 2);
    let r = reference(&p);
    let w = ring(8);
    let cfg = BaselineConfig::new(BaselineMethod::Dgd, 0.5 / p.constants().m_local, 3000);
    let run = run_dgd(&p, &w, &cfg, &IterateBlock::zeros(8, p.dim()), Some(&r)).unwrap();
    let tail: Vec<f64> = run.trace.iter().rev().take(100).map(|r| r.dist_to_opt_sq.unwrap()).collect();
    assert!(tail.iter().all(|&d| d > 1e-8), "DGD with a constant step should not reach x*");
    let spread = tail.iter().cloned().fold(f64::MIN, f64::max) - tail.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 1e-8 * tail[0], "DGD should settle");
}

#[test]
fn extra_and_nids_are_exact() {
    // the first step leaves 1x* because local gradients differ there, but
    // the gradient correction brings both methods back, unlike DGD
    let p = quadratic(8, 10.0, 1.0, 3);
    let r = reference(&p);
    let w = ring(8);
    let x0 = IterateBlock::consensus(r.x_star.view(), 8);
    for method in [BaselineMethod::Extra, BaselineMethod::Nids] {
        let cfg = BaselineConfig::new(method, 0.5 / p.constants().m_local, 4000);
        let run = run_baseline(&p, &w, &cfg, &x0, None).unwrap();
        let err = (&*run.x - &*x0).mapv(f64::abs).fold(0.0f64, |m, &v| m.max(v));
        assert!(err <= 1e-10, "{method}: {err}");
    }
}

#[test]
fn mudag_needs_fewer_gradients_than_extra() {
    let p = quadratic(8, 50.0, 1.0, 4);
    let r = reference(&p);
    let w = ring(8);
    let x0 = IterateBlock::zeros(8, p.dim());
    let extra = run_extra(&p, &w, &BaselineConfig::new(BaselineMethod::Extra, 0.5 / p.constants().m_local, 4000), &x0, Some(&r))
        .unwrap();
    let extra_evals = grad_evals_to(&extra.trace, 1e-8).expect("EXTRA reaches 1e-8");
    let cfg = MudagConfig::defaults(&p, 6, 4000);
    let run = run_mudag(&p, &w, &cfg, x0.mean_row().view(), Some(&r)).unwrap();
    let mudag_evals = grad_evals_to(&run.trace, 1e-8).expect("Mudag reaches 1e-8");
    assert!(mudag_evals < extra_evals, "mudag {mudag_evals} vs extra {extra_evals}");
}

#[test]
fn nids_reaches_the_optimum_on_a_ring() {
    let p = quadratic(8, 10.0, 1.0, 5);
    let r = reference(&p);
    let cfg = BaselineConfig::new(BaselineMethod::Nids, 1.0 / p.constants().m_local, 3000);
    let run = run_nids(&p, &ring(8), &cfg, &IterateBlock::zeros(8, p.dim()), Some(&r)).unwrap();
    assert!(run.trace.last().unwrap().dist_to_opt_sq.unwrap() < 1e-16);
}

#[test]
fn runs_are_deterministic() {
    let p = quadratic(10, 30.0, 2.0, 6);
    let r = reference(&p);
    let w = build_mixing_matrix(&generate_erdos_renyi(10, 0.4, 6).unwrap()).unwrap();
    let x0 = IterateBlock::zeros(10, p.dim());
    for method in BaselineMethod::ALL {
        let cfg = BaselineConfig::new(method, 0.5 / p.constants().m_local, 80);
        let a = run_baseline(&p, &w, &cfg, &x0, Some(&r)).unwrap();
        let b = run_baseline(&p, &w, &cfg, &x0, Some(&r)).unwrap();
        assert_eq!(a.trace, b.trace);
    }
    let cfg = MudagConfig::defaults(&p, 3, 80);
    let a = run_mudag(&p, &w, &cfg, x0.mean_row().view(), Some(&r)).unwrap();
    let b = run_mudag(&p, &w, &cfg, x0.mean_row().view(), Some(&r)).unwrap();
    assert_eq!(a.trace, b.trace);
}

#[test]
fn large_step_sizes_report_divergence() {
    let p = quadratic(8, 10.0, 1.0, 7);
    let r = reference(&p);
    let cfg = BaselineConfig::new(BaselineMethod::Dgd, 50.0 / p.constants().m_local, 500);
    match run_dgd(&p, &ring(8), &cfg, &IterateBlock::zeros(8, p.dim()), Some(&r)) {
        Err(Error::Diverged { t, partial, .. }) => {
            assert!(t > 0);
            assert_eq!(partial.last().unwrap().t + 1, t);
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn complete_graph_mudag_matches_agd_at_large_alpha() {
    let p = quadratic(6, 4.0, 1.0, 8);
    let w = build_mixing_matrix(&generate_named(Topology::Complete, 6).unwrap()).unwrap();
    let cfg = MudagConfig {
        alpha: 0.9,
        ..MudagConfig::defaults(&p, 1, 60)
    };
    assert!(!cfg.warnings().is_empty());
    let x0 = Array1::from_elem(p.dim(), 1.0);
    let run = run_mudag(&p, &w, &cfg, x0.view(), None).unwrap();
    let agd_cfg = BaselineConfig {
        momentum: Some(cfg.momentum()),
        ..BaselineConfig::new(BaselineMethod::Agd, cfg.eta, 60)
    };
    let agd = run_agd(&p, &agd_cfg, x0.view(), None).unwrap();
    let diff = (&run.mean - &agd.mean()).mapv(f64::abs).fold(0.0f64, |m, &v| m.max(v));
    assert!(diff <= 1e-12, "{diff}");
}

#[test]
fn one_mudag_step_contracts_disagreement() {
    let p = quadratic(8, 10.0, 1.0, 9);
    let w = ring(8);
    let cfg = MudagConfig::defaults(&p, 4, 1);
    let x0 = Array1::from_elem(p.dim(), 0.5);
    let mut state = MudagState::init(&p, &cfg, x0.view()).unwrap();
    for _ in 0..5 {
        mudag_step(&mut state, &p, &w, &cfg).unwrap();
    }
    // the x-update mixes exactly the block built from the previous step
    let before = state.clone();
    let y_prev = before.y_prev().unwrap();
    let g = p.aggregate_gradient(&before.y).unwrap();
    let mut pre = &*before.y + &*before.x - &**y_prev;
    pre.scaled_add(-cfg.eta, &(&*g - &**before.grad_prev().unwrap()));
    let pre = IterateBlock::from_array(pre);
    mudag_step(&mut state, &p, &w, &cfg).unwrap();
    let bound = mudag::consensus::fastmix_exact_contraction(&w, cfg.k) * consensus_error(&pre);
    assert!(consensus_error(&state.x) <= bound + 1e-12);
    assert_eq!(state.x, fastmix(&pre, &w, cfg.k).unwrap());
}

#[test]
fn tracking_form_counts_an_extra_gradient() {
    let p = quadratic(6, 10.0, 1.0, 10);
    let cfg = MudagConfig {
        form: Form::Tracking,
        ..MudagConfig::defaults(&p, 2, 10)
    };
    let run = run_mudag(&p, &ring(6), &cfg, Array1::zeros(p.dim()).view(), None).unwrap();
    let last = run.trace.last().unwrap();
    assert_eq!((last.grad_evals, last.comm_rounds), (11, 40));
}

#[test]
fn theoretical_k_follows_the_closed_form() {
    let p = quadratic(10, 20.0, 1.0, 11);
    let r = reference(&p);
    let w = ring(10);
    let cfg = MudagConfig::defaults(&p, 1, 1);
    let x0 = Array1::<f64>::zeros(p.dim());
    let tk = theoretical_k(&p, &w, &cfg, x0.view(), Some(&r)).unwrap();
    let c = p.constants();
    let me = c.m_local * cfg.eta;
    let perron = 1.0 / (2.0 * (21.0 * me + 6.0 * me * me + 1.0) * (3.0 + 2.0 * me));
    let q = c.l / (c.m_local * tk.theta);
    let rate = (c.mu * cfg.alpha / (2304.0 * c.l) * (2.0 * q).min(q * q)).powi(2);
    assert!((tk.rho_perron - perron).abs() <= 1e-15 * perron);
    assert!((tk.rho_rate - rate).abs() <= 1e-12 * rate);
    assert_eq!(tk.rho, rate.min(perron));
    let base = 1.0 - w.gap().sqrt();
    assert!(base.powi(tk.k as i32) <= tk.rho);
    assert!(base.powi(tk.k as i32 - 1) > tk.rho);
    assert!(tk.theta >= 1.0 && tk.theta_certified);
    let estimate = (c.kappa_g() / w.gap()).sqrt() * (1.0 / tk.rho).ln();
    assert!((tk.k_estimate - estimate).abs() <= 1e-9 * estimate);
}

#[test]
fn theta_is_one_at_the_optimum() {
    let p = quadratic(6, 10.0, 1.0, 12);
    let r = reference(&p);
    let alpha = MudagConfig::defaults(&p, 1, 1).alpha;
    assert_eq!(theta(&p, &r, r.x_star.view(), alpha), 1.0);
    assert!(theta(&p, &r, Array1::zeros(p.dim()).view(), alpha) > 1.0);
}

#[test]
fn theoretical_k_without_optimum_is_uncertified() {
    let p = quadratic(6, 10.0, 1.0, 13);
    let cfg = MudagConfig::defaults(&p, 1, 1);
    let tk = theoretical_k(&p, &ring(6), &cfg, Array1::zeros(p.dim()).view(), None).unwrap();
    assert_eq!(tk.theta, 1.0);
    assert!(!tk.theta_certified);
    assert!(default_momentum(&p) > 0.0);
}
