//! Reference optimizers: centralized Nesterov AGD and the decentralized
//! single-mix methods DGD, EXTRA and NIDS.
//!
//! All runners record the same [`Trace`] schema as Mudag. One gradient
//! evaluation per iteration is counted for every method; the decentralized
//! ones count one communication round per multiplication by `W`.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, ArrayView1};

use crate::consensus::{plain_mix, IterateBlock};
use crate::graph::MixingMatrix;
use crate::objective::Problem;
use crate::trace::{Recorder, Reference, Trace};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaselineMethod {
    Agd,
    Dgd,
    Extra,
    Nids,
}

impl BaselineMethod {
    pub const ALL: [BaselineMethod; 4] = [
        BaselineMethod::Agd,
        BaselineMethod::Dgd,
        BaselineMethod::Extra,
        BaselineMethod::Nids,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::Agd => "agd",
            BaselineMethod::Dgd => "dgd",
            BaselineMethod::Extra => "extra",
            BaselineMethod::Nids => "nids",
        }
    }
}

impl fmt::Display for BaselineMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaselineMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BaselineMethod::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidInput(format!("unknown baseline method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    pub eta: f64,
    /// AGD momentum; `None` uses `(√L − √μ)/(√L + √μ)`.
    pub momentum: Option<f64>,
    /// Gossip rounds per DGD step.
    pub k_mix: usize,
    pub t: usize,
}

impl BaselineConfig {
    pub fn new(method: BaselineMethod, eta: f64, t: usize) -> Self {
        BaselineConfig {
            method,
            eta,
            momentum: None,
            k_mix: 1,
            t,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidInput(format!("step size must be finite and >= 0, got {}", self.eta)));
        }
        if let Some(beta) = self.momentum {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::InvalidInput(format!("momentum must lie in [0, 1), got {beta}")));
            }
        }
        if self.method == BaselineMethod::Dgd && self.k_mix == 0 {
            return Err(Error::InvalidInput("DGD needs at least one mixing round".into()));
        }
        Ok(())
    }
}

/// Output of a baseline run.
#[derive(Debug, Clone)]
pub struct BaselineRun {
    pub x: IterateBlock,
    pub trace: Trace,
}

impl BaselineRun {
    pub fn mean(&self) -> Array1<f64> {
        self.x.mean_row()
    }
}

/// Nesterov momentum `(√L − √μ)/(√L + √μ)` for the problem's constants.
pub fn default_momentum(problem: &Problem) -> f64 {
    let c = problem.constants();
    let (sl, sm) = (c.l.sqrt(), c.mu.sqrt());
    (sl - sm) / (sl + sm)
}

/// Centralized AGD on the averaged objective `f`.
#[derive(Debug, Clone)]
pub struct AgdState {
    pub x: Array1<f64>,
    pub y: Array1<f64>,
    pub t: usize,
}

impl AgdState {
    pub fn new(x0: ArrayView1<'_, f64>) -> Self {
        AgdState {
            x: x0.to_owned(),
            y: x0.to_owned(),
            t: 0,
        }
    }

    /// `x⁺ = y − η∇f(y)`, `y⁺ = x⁺ + β(x⁺ − x)`.
    pub fn step(&mut self, problem: &Problem, eta: f64, beta: f64) {
        let g = problem.gradient(self.y.view());
        let mut x_next = self.y.clone();
        x_next.scaled_add(-eta, &g);
        let mut y_next = x_next.clone();
        y_next.scaled_add(beta, &(&x_next - &self.x));
        self.x = x_next;
        self.y = y_next;
        self.t += 1;
    }
}

pub fn run_agd(
    problem: &Problem,
    cfg: &BaselineConfig,
    x0: ArrayView1<'_, f64>,
    reference: Option<&Reference>,
) -> Result<BaselineRun> {
    cfg.validate()?;
    check_dim(problem, x0.len())?;
    let beta = cfg.momentum.unwrap_or_else(|| default_momentum(problem));
    let mut rec = Recorder::new(problem, reference);
    let mut state = AgdState::new(x0);
    rec.point(0, state.x.view(), 0, 0)?;
    for t in 1..=cfg.t {
        state.step(problem, cfg.eta, beta);
        rec.point(t, state.x.view(), t as u64, 0)?;
    }
    Ok(BaselineRun {
        x: IterateBlock::consensus(state.x.view(), problem.num_agents()),
        trace: rec.trace,
    })
}

/// `x⁺ = W^{K_mix} x − η∇F(x)`.
pub fn run_dgd(
    problem: &Problem,
    w: &MixingMatrix,
    cfg: &BaselineConfig,
    x0: &IterateBlock,
    reference: Option<&Reference>,
) -> Result<BaselineRun> {
    cfg.validate()?;
    check_block(problem, w, x0)?;
    let mut rec = Recorder::new(problem, reference);
    let mut x = x0.clone();
    rec.block(0, &x, None, 0, 0)?;
    let k = cfg.k_mix;
    for t in 1..=cfg.t {
        let g = problem.aggregate_gradient(&x)?;
        let mut next = plain_mix(&x, w, k)?;
        next.scaled_add(-cfg.eta, &*g);
        x = next;
        rec.block(t, &x, None, t as u64, (t * k) as u64)?;
    }
    Ok(BaselineRun { x, trace: rec.trace })
}

/// EXTRA with `W̃ = (I + W)/2`:
/// `x_{t+2} = (I + W)x_{t+1} − W̃x_t − η(∇F(x_{t+1}) − ∇F(x_t))`.
pub fn run_extra(
    problem: &Problem,
    w: &MixingMatrix,
    cfg: &BaselineConfig,
    x0: &IterateBlock,
    reference: Option<&Reference>,
) -> Result<BaselineRun> {
    let mut s = TwoStep::start(problem, w, cfg, x0, reference)?;
    let wm = w.matrix();
    let mut wx_prev = wm.dot(&*s.x_prev);
    for t in 2..=cfg.t {
        let g = problem.aggregate_gradient(&s.x_cur)?;
        let wx_cur = wm.dot(&*s.x_cur);
        let mut next = &*s.x_cur + &wx_cur;
        next.scaled_add(-0.5, &*s.x_prev);
        next.scaled_add(-0.5, &wx_prev);
        next.scaled_add(-cfg.eta, &(&*g - &*s.g_prev));
        wx_prev = wx_cur;
        s.advance(t, next.into(), g)?;
    }
    Ok(s.finish())
}

/// NIDS with `W̃ = (I + W)/2`:
/// `x_{t+2} = W̃(2x_{t+1} − x_t − η(∇F(x_{t+1}) − ∇F(x_t)))`.
pub fn run_nids(
    problem: &Problem,
    w: &MixingMatrix,
    cfg: &BaselineConfig,
    x0: &IterateBlock,
    reference: Option<&Reference>,
) -> Result<BaselineRun> {
    let mut s = TwoStep::start(problem, w, cfg, x0, reference)?;
    let wm = w.matrix();
    for t in 2..=cfg.t {
        let g = problem.aggregate_gradient(&s.x_cur)?;
        let mut z = &*s.x_cur * 2.0;
        z -= &*s.x_prev;
        z.scaled_add(-cfg.eta, &(&*g - &*s.g_prev));
        let next = (&z + &wm.dot(&z)) * 0.5;
        s.advance(t, next.into(), g)?;
    }
    Ok(s.finish())
}

/// State shared by EXTRA and NIDS, which both start with
/// `x₁ = W x₀ − η∇F(x₀)` and spend one gradient and one round per step.
struct TwoStep<'a> {
    rec: Recorder<'a>,
    x_prev: IterateBlock,
    x_cur: IterateBlock,
    g_prev: IterateBlock,
}

impl<'a> TwoStep<'a> {
    /// Records `x₀` and, when `T ≥ 1`, takes the first step.
    fn start(
        problem: &'a Problem,
        w: &MixingMatrix,
        cfg: &BaselineConfig,
        x0: &IterateBlock,
        reference: Option<&'a Reference>,
    ) -> Result<Self> {
        cfg.validate()?;
        check_block(problem, w, x0)?;
        let mut rec = Recorder::new(problem, reference);
        rec.block(0, x0, None, 0, 0)?;
        let g0 = problem.aggregate_gradient(x0)?;
        if cfg.t == 0 {
            return Ok(TwoStep {
                rec,
                x_prev: x0.clone(),
                x_cur: x0.clone(),
                g_prev: g0,
            });
        }
        let mut x1 = plain_mix(x0, w, 1)?;
        x1.scaled_add(-cfg.eta, &*g0);
        rec.block(1, &x1, None, 1, 1)?;
        Ok(TwoStep {
            rec,
            x_prev: x0.clone(),
            x_cur: x1,
            g_prev: g0,
        })
    }

    fn advance(&mut self, t: usize, next: IterateBlock, g_cur: IterateBlock) -> Result<()> {
        self.x_prev = std::mem::replace(&mut self.x_cur, next);
        self.g_prev = g_cur;
        self.rec.block(t, &self.x_cur, None, t as u64, t as u64)
    }

    fn finish(self) -> BaselineRun {
        BaselineRun {
            x: self.x_cur,
            trace: self.rec.trace,
        }
    }
}

/// Runs one baseline. AGD starts from the average of `x0`'s rows.
pub fn run_baseline(
    problem: &Problem,
    w: &MixingMatrix,
    cfg: &BaselineConfig,
    x0: &IterateBlock,
    reference: Option<&Reference>,
) -> Result<BaselineRun> {
    match cfg.method {
        BaselineMethod::Agd => run_agd(problem, cfg, x0.mean_row().view(), reference),
        BaselineMethod::Dgd => run_dgd(problem, w, cfg, x0, reference),
        BaselineMethod::Extra => run_extra(problem, w, cfg, x0, reference),
        BaselineMethod::Nids => run_nids(problem, w, cfg, x0, reference),
    }
}

/// Result of a step-size grid search.
#[derive(Debug, Clone)]
pub struct Tuned {
    pub eta: f64,
    pub run: BaselineRun,
    /// `(η, outcome)` for every grid point; `None` marks divergence.
    pub tried: Vec<(f64, Option<f64>)>,
}

/// Grid search over `η ∈ {2^−k / M : k = 0..=k_max}`.
///
/// The winner is the non-diverging run that first reaches relative gap
/// `eps`; if none does, the smallest final gap wins. Needs a reference
/// optimum.
pub fn tune_step_size(
    problem: &Problem,
    w: &MixingMatrix,
    template: &BaselineConfig,
    x0: &IterateBlock,
    reference: &Reference,
    k_max: u32,
    eps: f64,
) -> Result<Tuned> {
    let m_local = problem.constants().m_local;
    let mut best: Option<((bool, f64), f64, BaselineRun)> = None;
    let mut tried = Vec::new();
    let mut last_err = None;
    for k in 0..=k_max {
        let eta = 0.5f64.powi(k as i32) / m_local;
        let cfg = BaselineConfig { eta, ..*template };
        match run_baseline(problem, w, &cfg, x0, Some(reference)) {
            Ok(run) => {
                // lower score is better: (not reached, iterations or final gap)
                let score = match run.trace.first_below_relative(eps) {
                    Some(r) => (false, r.t as f64),
                    None => (true, run.trace.last().and_then(|r| r.f_gap).unwrap_or(f64::INFINITY)),
                };
                tried.push((eta, Some(score.1)));
                let better = best.as_ref().is_none_or(|(s, _, _)| score < *s);
                if better {
                    best = Some((score, eta, run));
                }
            }
            Err(e @ Error::Diverged { .. }) => {
                tried.push((eta, None));
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    match best {
        Some((_, eta, run)) => Ok(Tuned { eta, run, tried }),
        None => Err(last_err.unwrap_or_else(|| Error::InvalidInput("empty step-size grid".into()))),
    }
}

fn check_dim(problem: &Problem, d: usize) -> Result<()> {
    if d != problem.dim() {
        return Err(Error::DimensionMismatch {
            what: "starting point vs problem dimension",
            expected: problem.dim(),
            got: d,
        });
    }
    Ok(())
}

fn check_block(problem: &Problem, w: &MixingMatrix, x0: &IterateBlock) -> Result<()> {
    if w.num_agents() != problem.num_agents() {
        return Err(Error::DimensionMismatch {
            what: "mixing matrix vs agent count",
            expected: problem.num_agents(),
            got: w.num_agents(),
        });
    }
    check_dim(problem, x0.dim())?;
    if x0.num_agents() != problem.num_agents() {
        return Err(Error::DimensionMismatch {
            what: "starting block rows vs agent count",
            expected: problem.num_agents(),
            got: x0.num_agents(),
        });
    }
    Ok(())
}
