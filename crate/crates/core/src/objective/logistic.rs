use ndarray::{Array1, Array2, ArrayView1, ArrayViewMut1};

use super::{Dataset, Family, LocalObjective, Problem, ProblemConstants};
use crate::linalg::symmetric_eigenvalues;
use crate::{Error, Result};

/// Regularized logistic loss of one agent:
/// `f_i(x) = (1/n) Σ_j log(1 + exp(−b_j ⟨a_j, x⟩)) + (σ/2)‖x‖²`.
///
/// `σ` may be negative, in which case `f_i` can be non-convex.
#[derive(Debug, Clone)]
pub struct LogisticLocal {
    features: Array2<f64>,
    labels: Array1<f64>,
    sigma: f64,
}

impl LogisticLocal {
    pub fn new(data: &Dataset, sigma: f64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidInput("agent has no samples".into()));
        }
        if !sigma.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite regularizer {sigma}")));
        }
        Ok(LogisticLocal {
            features: data.features().clone(),
            labels: data.labels().clone(),
            sigma,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn num_samples(&self) -> usize {
        self.labels.len()
    }

    /// `AᵀA / n`.
    fn scaled_gram(&self) -> Array2<f64> {
        self.features.t().dot(&self.features) / self.num_samples() as f64
    }
}

// log(1 + e^z) without overflow
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LocalObjective for LogisticLocal {
    fn dim(&self) -> usize {
        self.features.ncols()
    }

    fn value(&self, x: ArrayView1<'_, f64>) -> f64 {
        let margins = self.features.dot(&x);
        let loss: f64 = margins
            .iter()
            .zip(self.labels.iter())
            .map(|(z, b)| softplus(-b * z))
            .sum();
        loss / self.num_samples() as f64 + 0.5 * self.sigma * x.dot(&x)
    }

    fn gradient_into(&self, x: ArrayView1<'_, f64>, mut out: ArrayViewMut1<'_, f64>) {
        let n = self.num_samples() as f64;
        let mut weights = self.features.dot(&x);
        weights.zip_mut_with(&self.labels, |z, b| *z = -b * sigmoid(-b * *z) / n);
        out.assign(&self.features.t().dot(&weights));
        out.scaled_add(self.sigma, &x);
    }
}

/// Builds the logistic-regression family from per-agent shards and
/// regularizers.
///
/// Constants are certified bounds: the loss Hessian is at most `AᵀA/(4n)`,
/// so `M_i = λ_max(A_iᵀA_i)/(4n_i) + |σ_i|`, `L = λ_max((1/m)Σ A_iᵀA_i/n_i)/4 +
/// mean(σ)` and `μ = mean(σ)` (the data term is convex). `mean(σ)` must be
/// positive.
pub fn logistic_problem(shards: &[Dataset], sigmas: &[f64]) -> Result<Problem> {
    let m = shards.len();
    if m == 0 {
        return Err(Error::InvalidInput("logistic problem needs at least one agent".into()));
    }
    if sigmas.len() != m {
        return Err(Error::DimensionMismatch {
            what: "regularizers vs agents",
            expected: m,
            got: sigmas.len(),
        });
    }
    let d = shards[0].dim();
    let mut locals = Vec::with_capacity(m);
    for (shard, &sigma) in shards.iter().zip(sigmas) {
        if shard.dim() != d {
            return Err(Error::DimensionMismatch {
                what: "feature dimension across agents",
                expected: d,
                got: shard.dim(),
            });
        }
        locals.push(LogisticLocal::new(shard, sigma)?);
    }

    let mean_sigma = sigmas.iter().sum::<f64>() / m as f64;
    if !(mean_sigma > 0.0) {
        return Err(Error::InvalidInput(format!(
            "average regularizer must be positive for a strongly convex objective, got {mean_sigma}"
        )));
    }

    let mut gram_avg = Array2::<f64>::zeros((d, d));
    let mut m_local: f64 = 0.0;
    for local in &locals {
        let gram = local.scaled_gram();
        let top = symmetric_eigenvalues(gram.view())?[d - 1];
        m_local = m_local.max(top / 4.0 + local.sigma.abs());
        gram_avg += &gram;
    }
    gram_avg /= m as f64;
    let l = symmetric_eigenvalues(gram_avg.view())?[d - 1] / 4.0 + mean_sigma;
    let m_local = m_local.max(l);
    let nu = sigmas.iter().cloned().fold(f64::INFINITY, f64::min);
    let constants = ProblemConstants::new(l, mean_sigma, m_local, (nu > 0.0).then_some(nu))?;

    let locals = locals
        .into_iter()
        .map(|f| Box::new(f) as Box<dyn LocalObjective>)
        .collect();
    Problem::with_family(locals, constants, Family::Logistic, None)
}
