//! Acceptance criteria. Each test prints one PASS/FAIL line and then asserts.

use std::time::Instant;

use nalgebra::Matrix3;
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use mudag::baselines::{run_agd, tune_step_size, BaselineConfig, BaselineMethod};
use mudag::consensus::{consensus_error, fastmix, IterateBlock};
use mudag::graph::{
    build_mixing_matrix, generate_erdos_renyi, generate_named, spectral_quantities, MixingMatrix, Topology,
};
use mudag::mudag::{
    check_perron_bounds, contraction_matrix, mudag_step, perron_rho_bound, run_mudag, theoretical_k, Form,
    MudagConfig, MudagState,
};
use mudag::objective::{
    logistic_problem, random_quadratic, solve_reference, synthetic_logistic, Problem, RandomQuadraticSpec,
    SyntheticSpec,
};
use mudag::trace::{Reference, Trace};
use mudag::Error;
use mudag_acceptance::report;

fn gaussian_block(rng: &mut ChaCha8Rng, m: usize, d: usize, scale: f64) -> IterateBlock {
    IterateBlock::from_array(Array2::from_shape_fn((m, d), |_| {
        let z: f64 = StandardNormal.sample(&mut *rng);
        scale * z
    }))
}

fn max_abs(a: &Array1<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn mixing(t: Topology, m: usize) -> MixingMatrix {
    build_mixing_matrix(&generate_named(t, m).unwrap()).unwrap()
}

fn er_mixing(m: usize, p: f64, seed: u64) -> MixingMatrix {
    build_mixing_matrix(&generate_erdos_renyi(m, p, seed).unwrap()).unwrap()
}

fn reference_of(p: &Problem) -> Reference {
    solve_reference(p, 1e-11).unwrap().reference()
}

// ---------------------------------------------------------------------------
// FastMix cases shared by criteria 1 and 2

struct MixCase {
    w: MixingMatrix,
    x: IterateBlock,
    k: usize,
}

fn mix_cases() -> Vec<MixCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    (0..500u64)
        .map(|i| {
            let m = rng.random_range(2..=50usize);
            let w = match rng.random_range(0..5u32) {
                0 => {
                    let p = rng.random_range(0.3..=1.0);
                    match generate_erdos_renyi(m, p, 1000 + i) {
                        Ok(g) => build_mixing_matrix(&g).unwrap(),
                        Err(_) => mixing(Topology::Ring, m),
                    }
                }
                1 => mixing(Topology::Ring, m),
                2 => mixing(Topology::Path, m),
                3 => mixing(Topology::Star, m),
                _ => mixing(Topology::Complete, m),
            };
            let d = rng.random_range(1..=4usize);
            let scale = 10f64.powf(rng.random_range(-2.0..=2.0));
            let mut x = gaussian_block(&mut rng, m, d, scale);
            let offset: f64 = rng.random_range(-5.0..=5.0);
            x.mapv_inplace(|v| v + offset);
            let k = rng.random_range(0..=30usize);
            MixCase { w, x, k }
        })
        .collect()
}

#[test]
fn criterion_01_fastmix_average_preservation() {
    let start = Instant::now();
    let cases = mix_cases();
    let mut worst = 0.0f64;
    let mut violations = 0;
    for c in &cases {
        let out = fastmix(&c.x, &c.w, c.k).unwrap();
        let before = c.x.mean_row();
        let drift = max_abs(&(&out.mean_row() - &before));
        let allowed = 1e-12 * (1.0 + before.dot(&before).sqrt());
        worst = worst.max(drift / allowed);
        if drift > allowed {
            violations += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = violations == 0 && secs < 10.0;
    report(
        1,
        "FastMix average preservation",
        pass,
        &format!(
            "{} cases, {violations} over 1e-12(1+|xbar|), worst drift/allowance {worst:.3e}, {secs:.2}s",
            cases.len()
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_02_fastmix_contraction_bound() {
    let cases = mix_cases();
    let mut violations = 0;
    let mut worst_ratio = 0.0f64;
    let mut worst_excess = 0.0f64;
    for c in &cases {
        let out = fastmix(&c.x, &c.w, c.k).unwrap();
        let bound = spectral_quantities(&c.w).rho_for(c.k) * consensus_error(&c.x);
        let got = consensus_error(&out);
        if got > bound + 1e-9 {
            violations += 1;
            worst_excess = worst_excess.max(got - bound);
            worst_ratio = worst_ratio.max(got / bound);
        }
    }
    let pass = violations == 0;
    report(
        2,
        "FastMix contraction (1-sqrt(1-lambda2))^K",
        pass,
        &format!(
            "{violations}/{} cases exceed the bound by more than 1e-9 (worst ratio {worst_ratio:.2}, worst excess {worst_excess:.3e})",
            cases.len()
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------
// Mudag instances shared by criteria 3, 4 and 10

struct Instance {
    name: &'static str,
    problem: Problem,
    w: MixingMatrix,
    k: usize,
}

fn equivalence_instances() -> Vec<Instance> {
    let quad = |m, seed, het| {
        random_quadratic(&RandomQuadraticSpec {
            m,
            d: 5,
            kappa: 30.0,
            heterogeneity: het,
            shift_scale: 1.0,
            seed,
        })
        .unwrap()
    };
    let logistic = |m, seed| {
        let shards = synthetic_logistic(&SyntheticSpec {
            m,
            n_per_agent: 30,
            d: 6,
            noise: 0.1,
            seed,
        })
        .unwrap();
        logistic_problem(&shards, &vec![1e-2; m]).unwrap()
    };
    vec![
        Instance {
            name: "quadratic/ring8",
            problem: quad(8, 1, 1.0),
            w: mixing(Topology::Ring, 8),
            k: 6,
        },
        Instance {
            name: "quadratic/er12",
            problem: quad(12, 2, 3.0),
            w: er_mixing(12, 0.4, 2),
            k: 4,
        },
        Instance {
            name: "logistic/ring8",
            problem: logistic(8, 3),
            w: mixing(Topology::Ring, 8),
            k: 6,
        },
        Instance {
            name: "logistic/er10",
            problem: logistic(10, 4),
            w: er_mixing(10, 0.5, 4),
            k: 3,
        },
        Instance {
            name: "quadratic/er16",
            problem: quad(16, 5, 6.0),
            w: er_mixing(16, 0.3, 5),
            k: 5,
        },
    ]
}

fn relative_diff(a: &IterateBlock, b: &IterateBlock) -> f64 {
    let diff = IterateBlock::from_array(&**a - &**b);
    diff.norm() / a.norm().max(f64::MIN_POSITIVE)
}

#[test]
fn criterion_03_direct_and_tracking_forms_agree() {
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for inst in equivalence_instances() {
        let p = &inst.problem;
        let cfg = MudagConfig::defaults(p, inst.k, 100);
        let x0 = Array1::from_elem(p.dim(), 0.3);
        let mut direct = MudagState::init_direct(p, x0.view()).unwrap();
        let mut tracking = MudagState::init_tracking(p, x0.view(), cfg.eta).unwrap();
        let mut local = 0.0f64;
        for _ in 0..100 {
            mudag_step(&mut direct, p, &inst.w, &cfg).unwrap();
            mudag_step(&mut tracking, p, &inst.w, &cfg).unwrap();
            local = local.max(relative_diff(&direct.x, &tracking.x));
        }
        worst = worst.max(local);
        details.push(format!("{} {local:.1e}", inst.name));
    }
    let pass = worst <= 1e-8;
    report(
        3,
        "direct vs tracking Mudag iterates",
        pass,
        &format!("max relative difference over 100 steps: {}", details.join(", ")),
    );
    assert!(pass);
}

/// Residuals of the average-iterate identities across one step.
fn identity_residuals(p: &Problem, cfg: &MudagConfig, before: &MudagState, after: &MudagState) -> [f64; 4] {
    let (eta, alpha) = (cfg.eta, cfg.alpha);
    let y_bar = before.y.mean_row();
    let g_bar = p.aggregate_gradient(&before.y).unwrap().mean_row();
    let x_next = after.x.mean_row();

    let r_x = max_abs(&(&x_next - &(&y_bar - &(&g_bar * eta))));

    // s̄_t = η ḡ_t, and the v̄ recursion written with s̄_t when it is available
    let (r_s, s_term) = match before.s() {
        Some(s) => {
            let s_bar = s.mean_row();
            (max_abs(&(&s_bar - &(&g_bar * eta))), &s_bar / alpha)
        }
        None => (0.0, &g_bar * (eta / alpha)),
    };
    let v = before.v_mean(alpha);
    let v_next = after.v_mean(alpha);
    let predicted = &(&(&v * (1.0 - alpha)) + &(&y_bar * alpha)) - &s_term;
    let r_v = max_abs(&(&v_next - &predicted));

    let y_pred = (&x_next + &(&v_next * alpha)) / (1.0 + alpha);
    let r_y = max_abs(&(&after.y.mean_row() - &y_pred));
    [r_x, r_s, r_v, r_y]
}

fn complete_graph_instance() -> (Problem, MixingMatrix) {
    let p = random_quadratic(&RandomQuadraticSpec {
        m: 10,
        d: 6,
        kappa: 100.0,
        heterogeneity: 2.0,
        shift_scale: 1.0,
        seed: 9,
    })
    .unwrap();
    (p, mixing(Topology::Complete, 10))
}

fn rate_instance() -> (Problem, MixingMatrix) {
    let p = random_quadratic(&RandomQuadraticSpec {
        m: 20,
        d: 10,
        kappa: 100.0,
        heterogeneity: 3.0,
        shift_scale: 1.0,
        seed: 6,
    })
    .unwrap();
    (p, er_mixing(20, 0.5, 6))
}

#[test]
fn criterion_04_average_identities() {
    let mut worst = [0.0f64; 4];
    let mut steps = 0usize;
    let mut check = |p: &Problem, w: &MixingMatrix, cfg: &MudagConfig, n: usize| {
        let x0 = Array1::from_elem(p.dim(), 0.3);
        let mut state = MudagState::init(p, cfg, x0.view()).unwrap();
        for _ in 0..n {
            let before = state.clone();
            mudag_step(&mut state, p, w, cfg).unwrap();
            let r = identity_residuals(p, cfg, &before, &state);
            for (acc, v) in worst.iter_mut().zip(r) {
                *acc = acc.max(v);
            }
            steps += 1;
        }
        if let Some(s) = state.s() {
            let g_bar = p.aggregate_gradient(&state.y).unwrap().mean_row();
            worst[1] = worst[1].max(max_abs(&(&s.mean_row() - &(&g_bar * cfg.eta))));
        }
    };
    for inst in equivalence_instances() {
        for form in [Form::Direct, Form::Tracking] {
            let cfg = MudagConfig {
                form,
                ..MudagConfig::defaults(&inst.problem, inst.k, 100)
            };
            check(&inst.problem, &inst.w, &cfg, 100);
        }
    }
    let (p, w) = complete_graph_instance();
    check(&p, &w, &MudagConfig::defaults(&p, 1, 200), 200);
    let (p, w) = rate_instance();
    let cfg = MudagConfig::defaults(&p, 1, 300);
    let tk = theoretical_k(&p, &w, &cfg, Array1::zeros(p.dim()).view(), Some(&reference_of(&p))).unwrap();
    check(&p, &w, &MudagConfig { k: tk.k, ..cfg }, 300);

    let pass = worst.iter().all(|&r| r <= 1e-10);
    report(
        4,
        "average-iterate identities",
        pass,
        &format!(
            "{steps} steps; max residual xbar {:.1e}, sbar {:.1e}, vbar {:.1e}, ybar {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_complete_graph_matches_agd() {
    let (p, w) = complete_graph_instance();
    assert!(w.lambda2().abs() < 1e-12);
    let cfg = MudagConfig::defaults(&p, 1, 200);
    let x0 = Array1::from_elem(p.dim(), 0.3);
    let mut state = MudagState::init_direct(&p, x0.view()).unwrap();
    let agd_cfg = BaselineConfig {
        momentum: Some(cfg.momentum()),
        ..BaselineConfig::new(BaselineMethod::Agd, cfg.eta, 1)
    };
    let mut agd = mudag::baselines::AgdState::new(x0.view());
    let mut worst_mean = 0.0f64;
    let mut worst_rows = 0.0f64;
    for _ in 0..200 {
        mudag_step(&mut state, &p, &w, &cfg).unwrap();
        agd.step(&p, agd_cfg.eta, agd_cfg.momentum.unwrap());
        worst_mean = worst_mean.max(max_abs(&(&state.x.mean_row() - &agd.x)));
        worst_rows = worst_rows.max(consensus_error(&state.x));
    }
    // the public runner agrees with the stepped AGD state
    let run = run_agd(&p, &BaselineConfig { t: 200, ..agd_cfg }, x0.view(), None).unwrap();
    let runner_gap = max_abs(&(&run.mean() - &agd.x));
    let pass = worst_mean <= 1e-12 && worst_rows <= 1e-12 && runner_gap <= 1e-12;
    report(
        5,
        "complete graph Mudag equals centralized AGD",
        pass,
        &format!(
            "200 steps, max |xbar - x_agd| {worst_mean:.1e}, max row spread {worst_rows:.1e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_06_linear_rate() {
    let start = Instant::now();
    let (p, w) = rate_instance();
    let reference = reference_of(&p);
    let x0 = Array1::<f64>::zeros(p.dim());
    let base = MudagConfig::defaults(&p, 1, 300);
    let tk = theoretical_k(&p, &w, &base, x0.view(), Some(&reference)).unwrap();
    let cfg = MudagConfig { k: tk.k, ..base };
    let run = run_mudag(&p, &w, &cfg, x0.view(), Some(&reference)).unwrap();
    let v: Vec<f64> = run.trace.iter().map(|r| r.v_t.unwrap()).collect();
    let factor = 1.0 - cfg.alpha / 2.0;
    let rate_violations = v.windows(2).filter(|w| w[1] > factor * w[0] + 1e-9).count();

    let kappa = p.constants().kappa_g();
    let budget = 3 * (2.0 * kappa.sqrt() * (v[0] / 1e-8).ln()).ceil() as usize;
    let mut reached = None;
    for k in 1..=8 {
        let tuned = MudagConfig { k, t: budget, ..base };
        if let Ok(run) = run_mudag(&p, &w, &tuned, x0.view(), Some(&reference)) {
            if let Some(r) = run.trace.first_below(1e-8) {
                if reached.is_none_or(|(_, t)| r.t < t) {
                    reached = Some((k, r.t));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = rate_violations == 0 && reached.is_some() && secs < 30.0;
    report(
        6,
        "linear rate with theoretical K and tuned K",
        pass,
        &format!(
            "theoretical K={} (rho={:.2e}), {rate_violations} of 300 steps break V(t+1) <= (1-alpha/2)V(t)+1e-9; tuned {}; budget {budget}; {secs:.2}s",
            tk.k,
            tk.rho,
            match reached {
                Some((k, t)) => format!("K={k} reaches gap 1e-8 at t={t}"),
                None => "no K <= 8 reaches gap 1e-8".into(),
            }
        ),
    );
    assert!(pass);
}

// ---------------------------------------------------------------------------

/// Fewest iterations to relative gap `eps` over `K = 1..=8`.
fn best_mudag(p: &Problem, w: &MixingMatrix, reference: &Reference, t: usize, eps: f64) -> Option<(usize, Trace)> {
    let x0 = Array1::<f64>::zeros(p.dim());
    let mut best: Option<(usize, usize, Trace)> = None;
    for k in 1..=8 {
        let cfg = MudagConfig::defaults(p, k, t);
        if let Ok(run) = run_mudag(p, w, &cfg, x0.view(), Some(reference)) {
            if let Some(r) = run.trace.first_below_relative(eps) {
                if best.as_ref().is_none_or(|(_, it, _)| r.t < *it) {
                    best = Some((k, r.t, run.trace));
                }
            }
        }
    }
    best.map(|(k, _, trace)| (k, trace))
}

fn gap_at(trace: &Trace, grad_evals: u64) -> Option<f64> {
    trace
        .iter()
        .take_while(|r| r.grad_evals <= grad_evals)
        .last()
        .and_then(|r| r.f_gap)
}

#[test]
fn criterion_07_nonconvex_locals() {
    let (m, sigma_bar, eps, t) = (20usize, 1e-4, 1e-6, 4000usize);
    let shards = synthetic_logistic(&SyntheticSpec {
        m,
        n_per_agent: 50,
        d: 20,
        noise: 0.1,
        seed: 17,
    })
    .unwrap();
    let w = er_mixing(m, 0.5, 17);
    let convex = logistic_problem(&shards, &vec![sigma_bar; m]).unwrap();
    let mut sigmas = vec![-1e-2; m];
    sigmas[m - 1] = m as f64 * sigma_bar + (m - 1) as f64 * 1e-2;
    let nonconvex = logistic_problem(&shards, &sigmas).unwrap();
    assert!((nonconvex.constants().mu - convex.constants().mu).abs() < 1e-15);

    let ref_c = reference_of(&convex);
    let ref_n = reference_of(&nonconvex);
    let conv = best_mudag(&convex, &w, &ref_c, t, eps);
    let nonc = best_mudag(&nonconvex, &w, &ref_n, t, eps);

    let mut detail = String::new();
    let mut pass = false;
    if let (Some((kc, tc)), Some((kn, tn))) = (&conv, &nonc) {
        let it_c = tc.first_below_relative(eps).unwrap();
        let it_n = tn.first_below_relative(eps).unwrap();
        let within = it_n.t <= 2 * it_c.t;
        let budget = it_n.grad_evals;
        let mudag_gap = gap_at(tn, budget).unwrap().max(f64::MIN_POSITIVE);
        let x0 = IterateBlock::zeros(m, nonconvex.dim());
        let mut degraded = true;
        let mut parts = vec![format!(
            "Mudag iterations to 1e-6: convex {} (K={kc}), nonconvex {} (K={kn})",
            it_c.t, it_n.t
        )];
        for method in [BaselineMethod::Extra, BaselineMethod::Nids] {
            let template = BaselineConfig::new(method, 0.0, budget as usize);
            match tune_step_size(&nonconvex, &w, &template, &x0, &ref_n, 10, eps) {
                Ok(tuned) => {
                    let gap = gap_at(&tuned.run.trace, budget).unwrap_or(f64::INFINITY);
                    let ratio = gap / mudag_gap;
                    degraded &= ratio >= 10.0;
                    parts.push(format!("{method} gap ratio at budget {ratio:.1e}"));
                }
                Err(Error::Diverged { t, .. }) => parts.push(format!("{method} diverged at t={t}")),
                Err(e) => {
                    degraded = false;
                    parts.push(format!("{method} error {e}"));
                }
            }
        }
        pass = within && degraded;
        detail = parts.join("; ");
    } else {
        detail.push_str("Mudag did not reach 1e-6 with any K <= 8");
    }
    report(7, "non-convex locals", pass, &detail);
    assert!(pass);
}

#[test]
fn criterion_08_erdos_renyi_spectral_gaps() {
    let mean_gap = |p: f64| {
        (0..10u64)
            .map(|seed| er_mixing(100, p, seed).gap())
            .sum::<f64>()
            / 10.0
    };
    let (sparse, dense) = (mean_gap(0.1), mean_gap(0.5));
    let pass = (sparse - 0.05).abs() <= 0.03 && (dense - 0.81).abs() <= 0.10;
    report(
        8,
        "Erdos-Renyi spectral gaps",
        pass,
        &format!("m=100, 10 seeds: mean gap {sparse:.4} at p=0.1 (target 0.05+-0.03), {dense:.4} at p=0.5 (target 0.81+-0.10)"),
    );
    assert!(pass);
}

/// Diagonal similarity that equalises off-diagonal row and column norms, so
/// the general eigensolver does not lose digits to the spread of entries.
fn balanced(mut a: Matrix3<f64>) -> Matrix3<f64> {
    for _ in 0..50 {
        for i in 0..3 {
            let (mut row, mut col) = (0.0, 0.0);
            for j in (0..3).filter(|&j| j != i) {
                row += a[(i, j)].abs();
                col += a[(j, i)].abs();
            }
            if row > 0.0 && col > 0.0 {
                let f = (row / col).sqrt();
                for j in 0..3 {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
    a
}

#[test]
fn criterion_09_perron_diagnostic() {
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut worst_oracle = 0.0f64;
    let mut worst_lambda = 0.0f64;
    let mut worst_residual = 0.0f64;
    for me in [1.0, 2.0, 5.0] {
        let bound = perron_rho_bound(me);
        for j in 0..=60 {
            let rho = bound * 10f64.powf(-(j as f64) / 6.0);
            let diag = contraction_matrix(rho, me, 1.0).unwrap();
            let rep = check_perron_bounds(&diag, 1e-10);
            let a = Matrix3::from_fn(|r, c| diag.matrix[r][c]);
            let oracle = balanced(a)
                .complex_eigenvalues()
                .iter()
                .map(|z| z.re)
                .fold(f64::NEG_INFINITY, f64::max);
            let disagreement = (oracle - diag.lambda1).abs() / diag.lambda1;
            worst_oracle = worst_oracle.max(disagreement);
            worst_lambda = worst_lambda.max(diag.lambda1);
            let v = nalgebra::Vector3::from(diag.v);
            let residual = (a * v - v * diag.lambda1).amax() / (a.amax() * v.amax());
            worst_residual = worst_residual.max(residual);
            checked += 1;
            if !rep.all_hold() || disagreement > 1e-8 || residual > 1e-12 {
                failures.push(format!("M*eta={me} rho={rho:.3e} {rep:?}"));
            }
        }
    }
    let pass = failures.is_empty();
    report(
        9,
        "Perron diagnostic of the 3x3 contraction matrix",
        pass,
        &format!(
            "{checked} grid points, {} failing; max lambda1 {worst_lambda:.4}, max relative gap to oracle {worst_oracle:.1e}, max scaled residual {worst_residual:.1e}",
            failures.len()
        ),
    );
    assert!(pass, "{failures:?}");
}

#[test]
fn criterion_10_cost_bookkeeping() {
    let mut runs = 0;
    let mut mismatches = 0;
    for inst in equivalence_instances() {
        for form in [Form::Direct, Form::Tracking] {
            let cfg = MudagConfig {
                form,
                ..MudagConfig::defaults(&inst.problem, inst.k, 60)
            };
            let x0 = Array1::zeros(inst.problem.dim());
            let run = run_mudag(&inst.problem, &inst.w, &cfg, x0.view(), None).unwrap();
            runs += 1;
            let k = cfg.k as u64;
            for r in run.trace.iter() {
                let t = r.t as u64;
                let (comm, grads) = match form {
                    Form::Direct => (t * k, t),
                    Form::Tracking => (2 * t * k, t + 1),
                };
                if r.comm_rounds != comm || r.grad_evals != grads {
                    mismatches += 1;
                }
            }
            let last = run.trace.last().unwrap();
            if form == Form::Direct && (last.comm_rounds != 60 * k || last.grad_evals != 60) {
                mismatches += 1;
            }
        }
    }
    let pass = mismatches == 0;
    report(
        10,
        "communication and gradient counters",
        pass,
        &format!("{runs} runs; direct form Q = T*K and gradients = T, tracking form 2tK and t+1; {mismatches} mismatches"),
    );
    assert!(pass);
}

#[test]
fn criterion_11_aggregate_inequalities() {
    let m = 10;
    let shards = synthetic_logistic(&SyntheticSpec {
        m,
        n_per_agent: 40,
        d: 8,
        noise: 0.1,
        seed: 11,
    })
    .unwrap();
    let mut nonconvex_sigmas = vec![-1e-2; m];
    nonconvex_sigmas[m - 1] = 0.5;
    let families = vec![
        (
            "quadratic",
            random_quadratic(&RandomQuadraticSpec {
                m,
                d: 8,
                kappa: 50.0,
                heterogeneity: 4.0,
                shift_scale: 1.0,
                seed: 11,
            })
            .unwrap(),
        ),
        ("logistic", logistic_problem(&shards, &vec![1e-3; m]).unwrap()),
        ("logistic-nonconvex", logistic_problem(&shards, &nonconvex_sigmas).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let mut violations = 0;
    let mut worst = [0.0f64; 2];
    for (_, p) in &families {
        let big_m = p.constants().m_local;
        for _ in 0..200 {
            let scale = 10f64.powf(rng.random_range(-2.0..=1.0));
            let x = gaussian_block(&mut rng, m, p.dim(), scale);
            let y = gaussian_block(&mut rng, m, p.dim(), scale);
            let gx = p.aggregate_gradient(&x).unwrap();
            let gy = p.aggregate_gradient(&y).unwrap();
            let lhs = IterateBlock::from_array(&*gy - &*gx).norm();
            let rhs = big_m * IterateBlock::from_array(&*y - &*x).norm();
            worst[0] = worst[0].max(lhs / rhs);
            if lhs > rhs + 1e-9 {
                violations += 1;
            }

            let y_bar = y.mean_row();
            let g_bar = gy.mean_row();
            let lhs = (&g_bar - &p.gradient(y_bar.view())).mapv(|v| v * v).sum().sqrt();
            let rhs = big_m / (m as f64).sqrt() * consensus_error(&y);
            worst[1] = worst[1].max(lhs / rhs);
            if lhs > rhs + 1e-9 {
                violations += 1;
            }
        }
    }
    let pass = violations == 0;
    report(
        11,
        "aggregate gradient inequalities",
        pass,
        &format!(
            "3 families x 200 blocks, {violations} violations; max ratio Lipschitz {:.3}, deviation {:.3}",
            worst[0], worst[1]
        ),
    );
    assert!(pass);
}
