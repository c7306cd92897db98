use ndarray::Array1;

use super::Problem;
use crate::baselines::{default_momentum, AgdState};
use crate::trace::Reference;
use crate::{Error, Result};

/// Default iteration cap of [`solve_reference`].
pub const REFERENCE_MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub x_star: Array1<f64>,
    pub f_star: f64,
    /// `‖∇f(x_star)‖` at termination.
    pub grad_norm: f64,
    pub iterations: usize,
}

impl ReferenceSolution {
    pub fn reference(&self) -> Reference {
        Reference {
            x_star: self.x_star.clone(),
            f_star: self.f_star,
        }
    }
}

/// Centralized Nesterov AGD from the origin until `‖∇f(x)‖ ≤ tol`.
pub fn solve_reference(problem: &Problem, tol: f64) -> Result<ReferenceSolution> {
    solve_reference_with_cap(problem, tol, REFERENCE_MAX_ITERATIONS)
}

pub fn solve_reference_with_cap(problem: &Problem, tol: f64, cap: usize) -> Result<ReferenceSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let eta = 1.0 / problem.constants().l;
    let beta = default_momentum(problem);
    let mut state = AgdState::new(Array1::zeros(problem.dim()).view());
    let mut grad_norm = norm(&problem.gradient(state.x.view()));
    let mut best = (grad_norm, state.x.clone());
    while grad_norm > tol {
        if state.t >= cap {
            return Err(Error::IterationCap {
                cap,
                residual: best.0,
            });
        }
        state.step(problem, eta, beta);
        grad_norm = norm(&problem.gradient(state.x.view()));
        if !grad_norm.is_finite() {
            return Err(Error::Diverged {
                t: state.t,
                reason: "reference solver produced a non-finite gradient".into(),
                partial: Box::default(),
            });
        }
        if grad_norm < best.0 {
            best = (grad_norm, state.x.clone());
        }
    }
    Ok(ReferenceSolution {
        f_star: problem.value(state.x.view()),
        x_star: state.x,
        grad_norm,
        iterations: state.t,
    })
}

fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}
