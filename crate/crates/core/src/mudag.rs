//! Multi-consensus accelerated decentralized gradient descent.
//!
//! Each agent keeps rows of `𝐱`, `𝐲` and (in the tracking form) `𝐬`. One step
//! of the direct form is
//!
//! ```text
//! 𝐱_{t+1} = FastMix(𝐲_t + 𝐱_t − 𝐲_{t−1} − η(∇F(𝐲_t) − ∇F(𝐲_{t−1})), K)
//! 𝐲_{t+1} = 𝐱_{t+1} + (1−α)/(1+α) · (𝐱_{t+1} − 𝐱_t)
//! ```
//!
//! started from `𝐲_{−1} = 𝐱_0 = 𝐲_0 = 𝟏x̄₀` and `∇F(𝐲_{−1}) = 0`. The
//! tracking form carries `𝐬_t` explicitly:
//!
//! ```text
//! 𝐱_{t+1} = FastMix(𝐲_t − 𝐬_t, K)
//! 𝐬_{t+1} = FastMix(𝐬_t, K) + η(∇F(𝐲_{t+1}) − ∇F(𝐲_t)) − (FastMix(𝐲_t, K) − 𝐲_t)
//! ```
//!
//! with `𝐬_0 = η∇F(𝐲_0)`. Both produce the same `𝐱_t`. The direct form costs
//! `K` rounds per step; the tracking form mixes `𝐲_t` and `𝐬_t` separately and
//! costs `2K`.

use ndarray::{Array1, ArrayView1};

use crate::consensus::{fastmix, IterateBlock};
use crate::graph::MixingMatrix;
use crate::linalg::perron_3x3;
use crate::objective::Problem;
use crate::trace::{Recorder, Reference, Trace};
use crate::{Error, Result};

/// Upper cap on the default momentum parameter.
pub const ALPHA_CAP: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Form {
    #[default]
    Direct,
    Tracking,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MudagConfig {
    pub eta: f64,
    pub alpha: f64,
    /// Gossip rounds per step.
    pub k: usize,
    /// Outer iterations.
    pub t: usize,
    pub form: Form,
}

impl MudagConfig {
    /// `η = 1/L`, `α = min(√(μ/L), 0.999)`.
    pub fn defaults(problem: &Problem, k: usize, t: usize) -> Self {
        let c = problem.constants();
        MudagConfig {
            eta: 1.0 / c.l,
            alpha: (c.mu / c.l).sqrt().min(ALPHA_CAP),
            k,
            t,
            form: Form::Direct,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidInput(format!("step size must be positive, got {}", self.eta)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }

    /// `(1 − α)/(1 + α)`.
    pub fn momentum(&self) -> f64 {
        (1.0 - self.alpha) / (1.0 + self.alpha)
    }

    /// Conditions outside the regime covered by the convergence analysis.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.alpha > 0.5 {
            out.push(format!(
                "alpha = {} exceeds 1/2; the linear-rate guarantee does not cover this setting",
                self.alpha
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Memory {
    Direct {
        y_prev: IterateBlock,
        grad_prev: IterateBlock,
    },
    Tracking {
        s: IterateBlock,
        grad_y: IterateBlock,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MudagState {
    pub x: IterateBlock,
    pub y: IterateBlock,
    /// `x̄_{t−1}` (equal to `x̄₀` at `t = 0`).
    pub x_mean_prev: Array1<f64>,
    pub t: usize,
    pub grad_evals: u64,
    pub comm_rounds: u64,
    memory: Memory,
}

impl MudagState {
    /// Direct-form start: `𝐲_{−1} = 𝐱_0 = 𝐲_0 = 𝟏x̄₀`, `∇F(𝐲_{−1}) = 0`.
    pub fn init_direct(problem: &Problem, x0: ArrayView1<'_, f64>) -> Result<Self> {
        check_start(problem, x0)?;
        let block = IterateBlock::consensus(x0, problem.num_agents());
        Ok(MudagState {
            x: block.clone(),
            y: block.clone(),
            x_mean_prev: x0.to_owned(),
            t: 0,
            grad_evals: 0,
            comm_rounds: 0,
            memory: Memory::Direct {
                y_prev: block,
                grad_prev: IterateBlock::zeros(problem.num_agents(), problem.dim()),
            },
        })
    }

    /// Tracking-form start with `𝐬_0 = η∇F(𝐲_0)`; evaluates one gradient.
    pub fn init_tracking(problem: &Problem, x0: ArrayView1<'_, f64>, eta: f64) -> Result<Self> {
        check_start(problem, x0)?;
        let block = IterateBlock::consensus(x0, problem.num_agents());
        let grad_y = problem.aggregate_gradient(&block)?;
        let s = IterateBlock::from_array(&*grad_y * eta);
        Ok(MudagState {
            x: block.clone(),
            y: block,
            x_mean_prev: x0.to_owned(),
            t: 0,
            grad_evals: 1,
            comm_rounds: 0,
            memory: Memory::Tracking { s, grad_y },
        })
    }

    pub fn init(problem: &Problem, cfg: &MudagConfig, x0: ArrayView1<'_, f64>) -> Result<Self> {
        match cfg.form {
            Form::Direct => Self::init_direct(problem, x0),
            Form::Tracking => Self::init_tracking(problem, x0, cfg.eta),
        }
    }

    pub fn form(&self) -> Form {
        match self.memory {
            Memory::Direct { .. } => Form::Direct,
            Memory::Tracking { .. } => Form::Tracking,
        }
    }

    /// `𝐲_{t−1}` (direct form).
    pub fn y_prev(&self) -> Option<&IterateBlock> {
        match &self.memory {
            Memory::Direct { y_prev, .. } => Some(y_prev),
            Memory::Tracking { .. } => None,
        }
    }

    /// `∇F(𝐲_{t−1})` (direct form).
    pub fn grad_prev(&self) -> Option<&IterateBlock> {
        match &self.memory {
            Memory::Direct { grad_prev, .. } => Some(grad_prev),
            Memory::Tracking { .. } => None,
        }
    }

    /// `𝐬_t` (tracking form).
    pub fn s(&self) -> Option<&IterateBlock> {
        match &self.memory {
            Memory::Tracking { s, .. } => Some(s),
            Memory::Direct { .. } => None,
        }
    }

    /// `∇F(𝐲_t)` (tracking form).
    pub fn grad_y(&self) -> Option<&IterateBlock> {
        match &self.memory {
            Memory::Tracking { grad_y, .. } => Some(grad_y),
            Memory::Direct { .. } => None,
        }
    }

    /// `v̄_t = x̄_{t−1} + (x̄_t − x̄_{t−1})/α`.
    pub fn v_mean(&self, alpha: f64) -> Array1<f64> {
        let mean = self.x.mean_row();
        &self.x_mean_prev + &((&mean - &self.x_mean_prev) / alpha)
    }

    /// `V_t = f(x̄_t) − f* + (μ/2)‖v̄_t − x*‖²`.
    pub fn lyapunov(&self, problem: &Problem, reference: &Reference, alpha: f64) -> f64 {
        lyapunov_value(
            problem,
            reference,
            self.x.mean_row().view(),
            self.v_mean(alpha).view(),
        )
    }
}

/// `f(x̄) − f* + (μ/2)‖v̄ − x*‖²`.
pub fn lyapunov_value(
    problem: &Problem,
    reference: &Reference,
    x_mean: ArrayView1<'_, f64>,
    v_mean: ArrayView1<'_, f64>,
) -> f64 {
    let diff = &v_mean - &reference.x_star;
    problem.value(x_mean) - reference.f_star + 0.5 * problem.constants().mu * diff.dot(&diff)
}

fn check_start(problem: &Problem, x0: ArrayView1<'_, f64>) -> Result<()> {
    if x0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            what: "starting point vs problem dimension",
            expected: problem.dim(),
            got: x0.len(),
        });
    }
    Ok(())
}

fn non_finite(t: usize) -> Error {
    Error::Diverged {
        t,
        reason: "non-finite iterate".into(),
        partial: Box::default(),
    }
}

/// `𝐲⁺ = 𝐱⁺ + β(𝐱⁺ − 𝐱)`.
fn extrapolate(x_next: &IterateBlock, x: &IterateBlock, beta: f64) -> IterateBlock {
    let mut y = x_next.clone();
    y.scaled_add(beta, &(&**x_next - &**x));
    y
}

/// One direct-form step: one aggregate gradient, `K` rounds.
pub fn mudag_step_direct(
    state: &mut MudagState,
    problem: &Problem,
    w: &MixingMatrix,
    cfg: &MudagConfig,
) -> Result<()> {
    let Memory::Direct { y_prev, grad_prev } = &mut state.memory else {
        return Err(Error::InvalidInput("direct step on a tracking-form state".into()));
    };
    let grad = problem.aggregate_gradient(&state.y)?;
    let mut z = &*state.y + &*state.x;
    z -= &**y_prev;
    z.scaled_add(-cfg.eta, &(&*grad - &**grad_prev));
    let x_next = fastmix(&z.into(), w, cfg.k)?;
    if !x_next.is_finite() {
        return Err(non_finite(state.t + 1));
    }
    let y_next = extrapolate(&x_next, &state.x, cfg.momentum());

    *y_prev = std::mem::replace(&mut state.y, y_next);
    *grad_prev = grad;
    state.x_mean_prev = state.x.mean_row();
    state.x = x_next;
    state.t += 1;
    state.grad_evals += 1;
    state.comm_rounds += cfg.k as u64;
    Ok(())
}

/// One tracking-form step: one aggregate gradient, `2K` rounds.
pub fn mudag_step_tracking(
    state: &mut MudagState,
    problem: &Problem,
    w: &MixingMatrix,
    cfg: &MudagConfig,
) -> Result<()> {
    let Memory::Tracking { s, grad_y } = &mut state.memory else {
        return Err(Error::InvalidInput("tracking step on a direct-form state".into()));
    };
    // FastMix is linear, so FastMix(𝐲 − 𝐬) = FastMix(𝐲) − FastMix(𝐬)
    let mixed_y = fastmix(&state.y, w, cfg.k)?;
    let mixed_s = fastmix(s, w, cfg.k)?;
    let x_next = IterateBlock::from_array(&*mixed_y - &*mixed_s);
    if !x_next.is_finite() {
        return Err(non_finite(state.t + 1));
    }
    let y_next = extrapolate(&x_next, &state.x, cfg.momentum());
    let grad_next = problem.aggregate_gradient(&y_next)?;

    let mut s_next = mixed_s;
    s_next.scaled_add(cfg.eta, &(&*grad_next - &**grad_y));
    *s_next -= &*mixed_y;
    *s_next += &*state.y;

    *s = s_next;
    *grad_y = grad_next;
    state.x_mean_prev = state.x.mean_row();
    state.x = x_next;
    state.y = y_next;
    state.t += 1;
    state.grad_evals += 1;
    state.comm_rounds += 2 * cfg.k as u64;
    Ok(())
}

pub fn mudag_step(
    state: &mut MudagState,
    problem: &Problem,
    w: &MixingMatrix,
    cfg: &MudagConfig,
) -> Result<()> {
    match state.form() {
        Form::Direct => mudag_step_direct(state, problem, w, cfg),
        Form::Tracking => mudag_step_tracking(state, problem, w, cfg),
    }
}

#[derive(Debug, Clone)]
pub struct MudagRun {
    /// Final block `𝐱_T`.
    pub x: IterateBlock,
    /// Output `x̄_T`.
    pub mean: Array1<f64>,
    pub trace: Trace,
    pub warnings: Vec<String>,
}

/// Runs `cfg.t` steps from the consensus start `𝟏x̄₀`, recording one trace
/// row per iterate (`t = 0..=T`). `V_t` is recorded when `reference` is given.
pub fn run_mudag(
    problem: &Problem,
    w: &MixingMatrix,
    cfg: &MudagConfig,
    x0: ArrayView1<'_, f64>,
    reference: Option<&Reference>,
) -> Result<MudagRun> {
    cfg.validate()?;
    if w.num_agents() != problem.num_agents() {
        return Err(Error::DimensionMismatch {
            what: "mixing matrix vs agent count",
            expected: problem.num_agents(),
            got: w.num_agents(),
        });
    }
    let mut state = MudagState::init(problem, cfg, x0)?;
    let mut rec = Recorder::new(problem, reference);
    let lyap = |s: &MudagState| reference.map(|r| s.lyapunov(problem, r, cfg.alpha));
    rec.block(0, &state.x, lyap(&state), state.grad_evals, state.comm_rounds)?;
    for _ in 0..cfg.t {
        if let Err(err) = mudag_step(&mut state, problem, w, cfg) {
            return Err(match err {
                Error::Diverged { t, reason, .. } => Error::Diverged {
                    t,
                    reason,
                    partial: Box::new(rec.trace),
                },
                other => other,
            });
        }
        rec.block(state.t, &state.x, lyap(&state), state.grad_evals, state.comm_rounds)?;
    }
    Ok(MudagRun {
        mean: state.x.mean_row(),
        x: state.x,
        trace: rec.trace,
        warnings: cfg.warnings(),
    })
}

/// `ρ` ceiling below which the 3×3 error-propagation matrix has spectral
/// radius at most 1/2: `1/(2(21Mη + 6M²η² + 1)(3 + 2Mη))`.
pub fn perron_rho_bound(m_eta: f64) -> f64 {
    1.0 / (2.0 * (21.0 * m_eta + 6.0 * m_eta * m_eta + 1.0) * (3.0 + 2.0 * m_eta))
}

/// The 3×3 matrix governing the joint decay of the consensus errors of
/// `𝐱`, `𝐲` and `𝐬`, with its Perron pair.
#[derive(Debug, Clone, Copy)]
pub struct ContractionDiagnostic {
    pub rho: f64,
    pub m_eta: f64,
    pub matrix: [[f64; 3]; 3],
    pub lambda1: f64,
    /// Perron vector scaled so `v[2] = 1`.
    pub v: [f64; 3],
}

/// Builds `[[2ρ, ρ, 2ρMη], [1, 0, Mη], [7+2Mη, ρ, ρ(1+2ρMη)]]`.
pub fn contraction_matrix(rho: f64, m_local: f64, eta: f64) -> Result<ContractionDiagnostic> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidInput(format!("rho must be positive, got {rho}")));
    }
    let me = m_local * eta;
    if !(me > 0.0 && me.is_finite()) {
        return Err(Error::InvalidInput(format!("M·eta must be positive, got {me}")));
    }
    let matrix = [
        [2.0 * rho, rho, 2.0 * rho * me],
        [1.0, 0.0, me],
        [7.0 + 2.0 * me, rho, rho * (1.0 + 2.0 * rho * me)],
    ];
    let pair = perron_3x3(&matrix)?;
    Ok(ContractionDiagnostic {
        rho,
        m_eta: me,
        matrix,
        lambda1: pair.value,
        v: pair.vector,
    })
}

/// Which of the spectral and eigenvector bounds hold for a diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PerronReport {
    /// `ρ` below [`perron_rho_bound`].
    pub rho_admissible: bool,
    /// `λ₁ ≤ 1/2`.
    pub lambda_at_most_half: bool,
    /// `√ρ < λ₁`.
    pub sqrt_rho_below_lambda: bool,
    /// `v(1) ≤ v(3)/(2(7 + 2Mη))`.
    pub v1_bound: bool,
    /// `v(2) ≤ (1/(2√ρ(7 + 2Mη)) + Mη/√ρ) v(3)`.
    pub v2_bound: bool,
}

impl PerronReport {
    pub fn all_hold(&self) -> bool {
        self.lambda_at_most_half && self.sqrt_rho_below_lambda && self.v1_bound && self.v2_bound
    }
}

/// Evaluates the bounds with absolute slack `tol`.
pub fn check_perron_bounds(diag: &ContractionDiagnostic, tol: f64) -> PerronReport {
    let (rho, me) = (diag.rho, diag.m_eta);
    let sr = rho.sqrt();
    let [v1, v2, v3] = diag.v;
    PerronReport {
        rho_admissible: rho <= perron_rho_bound(me),
        lambda_at_most_half: diag.lambda1 <= 0.5 + tol,
        sqrt_rho_below_lambda: sr < diag.lambda1 + tol,
        v1_bound: v1 <= v3 / (2.0 * (7.0 + 2.0 * me)) + tol,
        v2_bound: v2 <= (1.0 / (2.0 * sr * (7.0 + 2.0 * me)) + me / sr) * v3 + tol,
    }
}

/// Gossip depth derived from the convergence analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalK {
    /// Smallest `K` with `(1 − √(1 − λ₂))^K ≤ ρ`.
    pub k: usize,
    /// Target contraction: the smaller of `rho_rate` and `rho_perron`.
    pub rho: f64,
    /// `((μα/(2304L)) · min{2L/(MΘ), L²/(M²Θ²)})²`.
    pub rho_rate: f64,
    /// [`perron_rho_bound`] at `Mη`.
    pub rho_perron: f64,
    pub theta: f64,
    /// `false` when `Θ` was not computed from a known optimum.
    pub theta_certified: bool,
    /// `√(κ_g/(1 − λ₂)) · ln(1/ρ)`, the closed-form depth estimate.
    pub k_estimate: f64,
}

/// `Θ = 1 + (μ/(288m)) ‖∇f(x̄₀) − ∇f(x*)‖² / (f(x̄₀) − f* + (μ/2)‖x̄₀/α − x*‖²)`.
/// A vanishing numerator gives exactly 1.
pub fn theta(problem: &Problem, reference: &Reference, x0: ArrayView1<'_, f64>, alpha: f64) -> f64 {
    let c = problem.constants();
    let dg = &problem.gradient(x0) - &problem.gradient(reference.x_star.view());
    let num = dg.dot(&dg);
    if num == 0.0 {
        return 1.0;
    }
    let shifted = &(&x0 / alpha) - &reference.x_star;
    let den = problem.value(x0) - reference.f_star + 0.5 * c.mu * shifted.dot(&shifted);
    1.0 + c.mu / (288.0 * problem.num_agents() as f64) * num / den
}

/// Smallest `K` meeting both the rate condition and the Perron bound.
///
/// Without a reference optimum `Θ = 1` is used and flagged uncertified.
pub fn theoretical_k(
    problem: &Problem,
    w: &MixingMatrix,
    cfg: &MudagConfig,
    x0: ArrayView1<'_, f64>,
    reference: Option<&Reference>,
) -> Result<TheoreticalK> {
    let gap = w.gap();
    if !(gap > 0.0) {
        return Err(Error::Disconnected);
    }
    let c = problem.constants();
    let (theta, certified) = match reference {
        Some(r) => (theta(problem, r, x0, cfg.alpha), true),
        None => (1.0, false),
    };
    let ratio = c.m_local * theta / c.l;
    let sqrt_rho = c.mu * cfg.alpha / (2304.0 * c.l) * (2.0 / ratio).min(1.0 / (ratio * ratio));
    let rho_rate = sqrt_rho * sqrt_rho;
    let rho_perron = perron_rho_bound(c.m_local * cfg.eta);
    let rho = rho_rate.min(rho_perron);
    Ok(TheoreticalK {
        k: k_for_rho(gap, rho),
        rho,
        rho_rate,
        rho_perron,
        theta,
        theta_certified: certified,
        k_estimate: (c.kappa_g() / gap).sqrt() * (1.0 / rho).ln(),
    })
}

/// Smallest `K ≥ 1` with `(1 − √gap)^K ≤ rho`.
pub fn k_for_rho(gap: f64, rho: f64) -> usize {
    let base = 1.0 - gap.sqrt();
    if base <= 0.0 || rho >= 1.0 {
        return 1;
    }
    let mut k = (rho.ln() / base.ln()).ceil().max(1.0) as usize;
    // guard the rounding of the logarithm ratio in both directions
    while base.powi(k as i32) > rho {
        k += 1;
    }
    while k > 1 && base.powi(k as i32 - 1) <= rho {
        k -= 1;
    }
    k
}
