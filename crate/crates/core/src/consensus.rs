//! Gossip averaging over `m × d` iterate blocks.
//!
//! One multiplication by `W` is one communication round. [`fastmix`] runs the
//! two-term accelerated recurrence
//!
//! ```text
//! x^{k+1} = (1 + η_w) W x^k − η_w x^{k−1},   x^{−1} = x^0,
//! η_w = (1 − √(1 − λ₂²)) / (1 + √(1 − λ₂²)),
//! ```
//!
//! and [`plain_mix`] the plain power `W^K x`. Both are linear and keep the
//! column means of the block unchanged.

use std::ops::{Deref, DerefMut};

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::graph::MixingMatrix;
use crate::{Error, Result};

/// Aggregate variable: row `i` is agent `i`'s local copy in `ℝ^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateBlock(Array2<f64>);

impl IterateBlock {
    pub fn zeros(m: usize, d: usize) -> Self {
        IterateBlock(Array2::zeros((m, d)))
    }

    pub fn from_array(values: Array2<f64>) -> Self {
        IterateBlock(values)
    }

    /// Every row equal to `row`.
    pub fn consensus(row: ArrayView1<'_, f64>, m: usize) -> Self {
        let d = row.len();
        let mut values = Array2::zeros((m, d));
        for mut r in values.rows_mut() {
            r.assign(&row);
        }
        IterateBlock(values)
    }

    pub fn num_agents(&self) -> usize {
        self.0.nrows()
    }

    pub fn dim(&self) -> usize {
        self.0.ncols()
    }

    pub fn into_array(self) -> Array2<f64> {
        self.0
    }

    /// Column-wise mean `x̄ = (1/m) 𝟏ᵀx`.
    pub fn mean_row(&self) -> Array1<f64> {
        self.0
            .mean_axis(Axis(0))
            .unwrap_or_else(|| Array1::zeros(self.dim()))
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Deref for IterateBlock {
    type Target = Array2<f64>;

    fn deref(&self) -> &Array2<f64> {
        &self.0
    }
}

impl DerefMut for IterateBlock {
    fn deref_mut(&mut self) -> &mut Array2<f64> {
        &mut self.0
    }
}

impl From<Array2<f64>> for IterateBlock {
    fn from(values: Array2<f64>) -> Self {
        IterateBlock(values)
    }
}

/// `‖x − 𝟏x̄‖` (Frobenius).
pub fn consensus_error(x: &IterateBlock) -> f64 {
    let mean = x.mean_row();
    let mut acc = 0.0;
    for row in x.rows() {
        for (v, c) in row.iter().zip(mean.iter()) {
            let diff = v - c;
            acc += diff * diff;
        }
    }
    acc.sqrt()
}

/// Momentum weight of the accelerated gossip recurrence for a given `λ₂`.
pub fn fastmix_step_size(lambda2: f64) -> f64 {
    let root = (1.0 - lambda2 * lambda2).max(0.0).sqrt();
    (1.0 - root) / (1.0 + root)
}

fn check_rows(x: &IterateBlock, w: &MixingMatrix) -> Result<()> {
    if x.num_agents() != w.num_agents() {
        return Err(Error::DimensionMismatch {
            what: "iterate rows vs mixing matrix size",
            expected: w.num_agents(),
            got: x.num_agents(),
        });
    }
    Ok(())
}

/// Accelerated gossip: exactly `k` multiplications by `W`. `k = 0` is the
/// identity.
pub fn fastmix(x0: &IterateBlock, w: &MixingMatrix, k: usize) -> Result<IterateBlock> {
    check_rows(x0, w)?;
    if k == 0 {
        return Ok(x0.clone());
    }
    let eta = fastmix_step_size(w.lambda2());
    let wm = w.matrix();
    let mut prev = x0.0.clone();
    let mut cur = x0.0.clone();
    for _ in 0..k {
        let mut next = wm.dot(&cur);
        next.zip_mut_with(&prev, |n, p| *n = (1.0 + eta) * *n - eta * p);
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(IterateBlock(cur))
}

/// Plain gossip `W^k x`.
pub fn plain_mix(x0: &IterateBlock, w: &MixingMatrix, k: usize) -> Result<IterateBlock> {
    check_rows(x0, w)?;
    let wm = w.matrix();
    let mut cur = x0.0.clone();
    for _ in 0..k {
        cur = wm.dot(&cur);
    }
    Ok(IterateBlock(cur))
}

/// Scalar form of the accelerated recurrence: the factor applied by
/// [`fastmix`] to an eigencomponent of `W` with eigenvalue `lambda`.
pub fn fastmix_polynomial(lambda: f64, lambda2: f64, k: usize) -> f64 {
    let eta = fastmix_step_size(lambda2);
    let (mut prev, mut cur) = (1.0, 1.0);
    for _ in 0..k {
        let next = (1.0 + eta) * lambda * cur - eta * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Exact worst-case contraction of `k` accelerated rounds on the
/// disagreement subspace: `max |p_k(λ)|` over the non-unit eigenvalues of
/// `W`. Always a valid certificate for `consensus_error`.
pub fn fastmix_exact_contraction(w: &MixingMatrix, k: usize) -> f64 {
    let spectrum = w.spectrum();
    let m = spectrum.len();
    spectrum
        .iter()
        .take(m - 1)
        .map(|&lam| fastmix_polynomial(lam, w.lambda2(), k).abs())
        .fold(0.0, f64::max)
}
