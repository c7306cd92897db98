use ndarray::{Array1, Array2, ArrayView1, ArrayViewMut1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Family, LocalObjective, Problem, ProblemConstants};
use crate::linalg::{symmetric_eigen, symmetric_eigenvalues};
use crate::{Error, Result};

/// `f_i(x) = ½ xᵀHx − cᵀx` with symmetric (possibly indefinite) `H`.
#[derive(Debug, Clone)]
pub struct QuadraticLocal {
    pub h: Array2<f64>,
    pub c: Array1<f64>,
}

impl LocalObjective for QuadraticLocal {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn value(&self, x: ArrayView1<'_, f64>) -> f64 {
        0.5 * x.dot(&self.h.dot(&x)) - self.c.dot(&x)
    }

    fn gradient_into(&self, x: ArrayView1<'_, f64>, mut out: ArrayViewMut1<'_, f64>) {
        out.assign(&self.h.dot(&x));
        out -= &self.c;
    }
}

/// Builds the quadratic family. Constants are exact: `L` and `μ` are the
/// extreme eigenvalues of the average Hessian, `M` the largest spectral norm
/// of a local Hessian and `ν` the smallest local eigenvalue when positive.
pub fn quadratic_problem(hessians: Vec<Array2<f64>>, shifts: Vec<Array1<f64>>) -> Result<Problem> {
    let m = hessians.len();
    if m == 0 {
        return Err(Error::InvalidInput("quadratic problem needs at least one agent".into()));
    }
    if shifts.len() != m {
        return Err(Error::DimensionMismatch {
            what: "shift vectors vs Hessians",
            expected: m,
            got: shifts.len(),
        });
    }
    let d = shifts[0].len();
    for (h, c) in hessians.iter().zip(&shifts) {
        if h.dim() != (d, d) || c.len() != d {
            return Err(Error::DimensionMismatch {
                what: "local Hessian / shift dimension",
                expected: d,
                got: c.len().max(h.nrows()),
            });
        }
        for i in 0..d {
            for j in 0..i {
                if (h[[i, j]] - h[[j, i]]).abs() > 1e-12 * (1.0 + h[[i, j]].abs()) {
                    return Err(Error::InvalidInput("local Hessian is not symmetric".into()));
                }
            }
        }
    }

    let mut h_avg = Array2::<f64>::zeros((d, d));
    let mut c_avg = Array1::<f64>::zeros(d);
    for (h, c) in hessians.iter().zip(&shifts) {
        h_avg += h;
        c_avg += c;
    }
    h_avg /= m as f64;
    c_avg /= m as f64;

    let avg = symmetric_eigen(h_avg.view())?;
    let (mu, l) = (avg.smallest(), avg.largest());
    if !(mu > 0.0) {
        return Err(Error::InvalidInput(format!(
            "average Hessian is not positive definite (smallest eigenvalue {mu})"
        )));
    }

    let mut m_local: f64 = 0.0;
    let mut nu = f64::INFINITY;
    for h in &hessians {
        let ev = symmetric_eigenvalues(h.view())?;
        m_local = m_local.max(ev[0].abs()).max(ev[d - 1].abs());
        nu = nu.min(ev[0]);
    }
    // M ≥ L holds exactly; guard against the last-bit disagreement between
    // two eigen-decompositions.
    let m_local = m_local.max(l);
    let constants = ProblemConstants::new(l, mu, m_local, (nu > 0.0).then_some(nu))?;

    // x* = H̄⁻¹ c̄ via the eigenbasis of H̄
    let coeffs = avg.vectors.t().dot(&c_avg) / &avg.values;
    let x_star = avg.vectors.dot(&coeffs);

    let locals = hessians
        .into_iter()
        .zip(shifts)
        .map(|(h, c)| Box::new(QuadraticLocal { h, c }) as Box<dyn LocalObjective>)
        .collect();
    Problem::with_family(locals, constants, Family::Quadratic, Some(x_star))
}

/// Seeded random quadratic instance with a prescribed global condition
/// number.
///
/// The average Hessian has eigenvalues evenly spaced in `[1, kappa]` (so
/// `μ = 1`, `L = κ`); local Hessians add zero-sum symmetric Gaussian
/// perturbations scaled by `heterogeneity`, which can make the locals
/// indefinite while leaving the average untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomQuadraticSpec {
    pub m: usize,
    pub d: usize,
    pub kappa: f64,
    pub heterogeneity: f64,
    pub shift_scale: f64,
    pub seed: u64,
}

impl Default for RandomQuadraticSpec {
    fn default() -> Self {
        RandomQuadraticSpec {
            m: 8,
            d: 5,
            kappa: 10.0,
            heterogeneity: 1.0,
            shift_scale: 1.0,
            seed: 0,
        }
    }
}

pub fn random_quadratic(spec: &RandomQuadraticSpec) -> Result<Problem> {
    let RandomQuadraticSpec {
        m,
        d,
        kappa,
        heterogeneity,
        shift_scale,
        seed,
    } = *spec;
    if m == 0 || d == 0 || !(kappa >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "random quadratic needs m, d >= 1 and kappa >= 1 (m={m}, d={d}, kappa={kappa})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = |rows: usize, cols: usize| -> Array2<f64> {
        Array2::from_shape_fn((rows, cols), |_| StandardNormal.sample(&mut rng))
    };

    // random orthogonal basis from the eigenvectors of a symmetric Gaussian matrix
    let g = gauss(d, d);
    let sym = (&g + &g.t()) / 2.0;
    let q = symmetric_eigen(sym.view())?.vectors;
    let spectrum = Array1::from_shape_fn(d, |k| {
        if d == 1 {
            1.0
        } else {
            1.0 + (kappa - 1.0) * k as f64 / (d - 1) as f64
        }
    });
    let h_bar = q.dot(&Array2::from_diag(&spectrum)).dot(&q.t());
    let h_bar = (&h_bar + &h_bar.t()) / 2.0;

    let mut deltas: Vec<Array2<f64>> = (0..m)
        .map(|_| {
            let g = gauss(d, d);
            (&g + &g.t()) / (2.0 * (d as f64).sqrt())
        })
        .collect();
    let mut mean = Array2::<f64>::zeros((d, d));
    for delta in &deltas {
        mean += delta;
    }
    mean /= m as f64;
    for delta in &mut deltas {
        *delta -= &mean;
    }

    let hessians = deltas
        .into_iter()
        .map(|delta| &h_bar + &(delta * heterogeneity))
        .collect();
    let shifts = (0..m)
        .map(|_| gauss(d, 1).column(0).to_owned() * shift_scale)
        .collect();
    quadratic_problem(hessians, shifts)
}
