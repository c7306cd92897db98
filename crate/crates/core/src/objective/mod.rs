//! The decentralized problem `min_x f(x) = (1/m) Σ_i f_i(x)`.
//!
//! A [`Problem`] owns one [`LocalObjective`] per agent together with the
//! smoothness and convexity constants the algorithms are tuned with. The
//! aggregate gradient of an iterate block stacks the local gradients row by
//! row: row `i` of `∇F(𝐱)` is `∇f_i(x_i)`.

mod data;
mod logistic;
mod quadratic;
mod reference;

use std::fmt;

use ndarray::{Array1, ArrayView1, ArrayViewMut1};

use crate::consensus::IterateBlock;
use crate::{Error, Result};

pub use data::{load_libsvm, parse_libsvm, partition, synthetic_logistic, Dataset, SyntheticSpec};
pub use logistic::{logistic_problem, LogisticLocal};
pub use quadratic::{quadratic_problem, random_quadratic, QuadraticLocal, RandomQuadraticSpec};
pub use reference::{solve_reference, solve_reference_with_cap, ReferenceSolution};

/// One agent's private objective.
pub trait LocalObjective: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    fn value(&self, x: ArrayView1<'_, f64>) -> f64;

    /// Writes `∇f_i(x)` into `out` (overwriting it).
    fn gradient_into(&self, x: ArrayView1<'_, f64>, out: ArrayViewMut1<'_, f64>);

    fn gradient(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let mut out = Array1::zeros(self.dim());
        self.gradient_into(x, out.view_mut());
        out
    }
}

/// Smoothness and convexity constants.
///
/// `l` and `mu` describe the averaged objective `f`; `m_local` bounds the
/// gradient Lipschitz constant of every `f_i`; `nu` is the common strong
/// convexity of the `f_i` when they all have one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemConstants {
    pub l: f64,
    pub mu: f64,
    pub m_local: f64,
    pub nu: Option<f64>,
}

// relative slack used when checking μ ≤ L ≤ M on computed constants
const ORDER_SLACK: f64 = 1e-12;

impl ProblemConstants {
    pub fn new(l: f64, mu: f64, m_local: f64, nu: Option<f64>) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidInput(format!(
                "global strong convexity must be positive, got mu={mu}"
            )));
        }
        if !(l.is_finite() && m_local.is_finite()) {
            return Err(Error::InvalidInput("non-finite smoothness constant".into()));
        }
        if mu > l * (1.0 + ORDER_SLACK) {
            return Err(Error::InvalidInput(format!("mu={mu} exceeds L={l}")));
        }
        if l > m_local * (1.0 + ORDER_SLACK) {
            return Err(Error::InvalidInput(format!("L={l} exceeds M={m_local}")));
        }
        let nu = nu.filter(|v| *v > 0.0);
        Ok(ProblemConstants {
            l,
            mu,
            m_local,
            nu,
        })
    }

    pub fn kappa_g(&self) -> f64 {
        self.l / self.mu
    }

    /// `M / ν`, undefined when some local objective is not strongly convex.
    pub fn kappa_l(&self) -> Option<f64> {
        self.nu.map(|nu| self.m_local / nu)
    }
}

/// Which family a problem was built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Quadratic,
    Logistic,
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Quadratic => "quadratic",
            Family::Logistic => "logistic",
            Family::Custom => "custom",
        })
    }
}

#[derive(Debug)]
pub struct Problem {
    locals: Vec<Box<dyn LocalObjective>>,
    dim: usize,
    constants: ProblemConstants,
    family: Family,
    closed_form_minimizer: Option<Array1<f64>>,
}

impl Problem {
    /// Assembles a problem from arbitrary local objectives and caller-supplied
    /// constants.
    pub fn new(locals: Vec<Box<dyn LocalObjective>>, constants: ProblemConstants) -> Result<Self> {
        Self::with_family(locals, constants, Family::Custom, None)
    }

    pub(crate) fn with_family(
        locals: Vec<Box<dyn LocalObjective>>,
        constants: ProblemConstants,
        family: Family,
        closed_form_minimizer: Option<Array1<f64>>,
    ) -> Result<Self> {
        let dim = locals
            .first()
            .map(|f| f.dim())
            .ok_or_else(|| Error::InvalidInput("problem needs at least one agent".into()))?;
        for f in &locals {
            if f.dim() != dim {
                return Err(Error::DimensionMismatch {
                    what: "local objective dimension",
                    expected: dim,
                    got: f.dim(),
                });
            }
        }
        Ok(Problem {
            locals,
            dim,
            constants,
            family,
            closed_form_minimizer,
        })
    }

    pub fn num_agents(&self) -> usize {
        self.locals.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constants(&self) -> &ProblemConstants {
        &self.constants
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn local(&self, agent: usize) -> &dyn LocalObjective {
        self.locals[agent].as_ref()
    }

    /// Exact minimizer when the family admits one in closed form.
    pub fn closed_form_minimizer(&self) -> Option<&Array1<f64>> {
        self.closed_form_minimizer.as_ref()
    }

    pub fn local_value(&self, agent: usize, x: ArrayView1<'_, f64>) -> f64 {
        self.locals[agent].value(x)
    }

    pub fn local_gradient(&self, agent: usize, x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.locals[agent].gradient(x)
    }

    /// `f(x) = (1/m) Σ f_i(x)`.
    pub fn value(&self, x: ArrayView1<'_, f64>) -> f64 {
        self.locals.iter().map(|f| f.value(x)).sum::<f64>() / self.num_agents() as f64
    }

    /// `∇f(x) = (1/m) Σ ∇f_i(x)`.
    pub fn gradient(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let mut acc = Array1::zeros(self.dim);
        let mut buf = Array1::zeros(self.dim);
        for f in &self.locals {
            f.gradient_into(x, buf.view_mut());
            acc += &buf;
        }
        acc / self.num_agents() as f64
    }

    fn check_block(&self, x: &IterateBlock) -> Result<()> {
        if x.num_agents() != self.num_agents() {
            return Err(Error::DimensionMismatch {
                what: "iterate rows vs agent count",
                expected: self.num_agents(),
                got: x.num_agents(),
            });
        }
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                what: "iterate columns vs problem dimension",
                expected: self.dim,
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// Row `i` is `∇f_i(x_i)`.
    pub fn aggregate_gradient(&self, x: &IterateBlock) -> Result<IterateBlock> {
        self.check_block(x)?;
        let mut out = IterateBlock::zeros(self.num_agents(), self.dim);
        for (i, f) in self.locals.iter().enumerate() {
            f.gradient_into(x.row(i), out.row_mut(i));
        }
        Ok(out)
    }

    /// `(1/m) Σ f_i(x_i)`.
    pub fn aggregate_value(&self, x: &IterateBlock) -> Result<f64> {
        self.check_block(x)?;
        let total: f64 = self
            .locals
            .iter()
            .enumerate()
            .map(|(i, f)| f.value(x.row(i)))
            .sum();
        Ok(total / self.num_agents() as f64)
    }
}
