//! Small dense linear algebra: a symmetric eigensolver and a Perron-root
//! routine for 3×3 nonnegative matrices.
//!
//! The symmetric solver is the classic two-phase scheme: Householder
//! reduction to tridiagonal form followed by implicit QL iterations with
//! Wilkinson-style shifts. It is exact enough (≈1e−14 relative) and fully
//! deterministic for the matrix sizes used here (up to ~1000).

use ndarray::{Array1, Array2, ArrayView2};

use crate::{Error, Result};

/// Eigen-decomposition of a real symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in ascending order.
    pub values: Array1<f64>,
    /// Orthonormal eigenvectors, column `k` pairs with `values[k]`.
    pub vectors: Array2<f64>,
}

impl SymmetricEigen {
    pub fn largest(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn smallest(&self) -> f64 {
        self.values[0]
    }
}

const MAX_QL_ITERATIONS: usize = 60;

/// Full eigen-decomposition of a symmetric matrix.
///
/// Only the lower triangle is trusted implicitly: the input is expected to be
/// symmetric and is not symmetrized.
pub fn symmetric_eigen(a: ArrayView2<'_, f64>) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch {
            what: "square matrix columns",
            expected: n,
            got: a.ncols(),
        });
    }
    if n == 0 {
        return Ok(SymmetricEigen {
            values: Array1::zeros(0),
            vectors: Array2::zeros((0, 0)),
        });
    }
    let mut v = a.to_owned();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = Array1::from_iter(order.iter().map(|&i| d[i]));
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn symmetric_eigenvalues(a: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    symmetric_eigen(a).map(|eig| eig.values)
}

// Householder reduction to tridiagonal form. On exit `v` holds the
// accumulated orthogonal transform, `d` the diagonal and `e[1..]` the
// sub-diagonal.
fn tridiagonalize(v: &mut Array2<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[[n - 1, j]];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[[i - 1, j]];
                v[[i, j]] = 0.0;
                v[[j, i]] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[[j, i]] = f;
                g = e[j] + v[[j, j]] * f;
                for k in (j + 1)..i {
                    g += v[[k, j]] * d[k];
                    e[k] += v[[k, j]] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[[k, j]] -= f * e[k] + g * d[k];
                }
                d[j] = v[[i - 1, j]];
                v[[i, j]] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        v[[n - 1, i]] = v[[i, i]];
        v[[i, i]] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[[k, i + 1]] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[[k, i + 1]] * v[[k, j]];
                }
                for k in 0..=i {
                    v[[k, j]] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[[k, i + 1]] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[[n - 1, j]];
        v[[n - 1, j]] = 0.0;
    }
    v[[n - 1, n - 1]] = 1.0;
    e[0] = 0.0;
}

// Implicit QL iterations on the tridiagonal (d, e), accumulating rotations
// into `v`.
fn tridiagonal_ql(v: &mut Array2<f64>, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::EigenNoConvergence(MAX_QL_ITERATIONS));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        h = v[[k, i + 1]];
                        v[[k, i + 1]] = s * v[[k, i]] + c * h;
                        v[[k, i]] = c * v[[k, i]] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Dominant (Perron) eigenpair of an entrywise nonnegative 3×3 matrix.
#[derive(Debug, Clone, Copy)]
pub struct PerronPair {
    pub value: f64,
    /// Eigenvector scaled so that its third entry is 1 when that entry is
    /// nonzero; otherwise scaled to unit Euclidean norm.
    pub vector: [f64; 3],
}

/// Largest real eigenvalue and its eigenvector for a nonnegative 3×3 matrix.
///
/// Newton's method on the characteristic polynomial started from the maximum
/// row sum converges monotonically from above, since the polynomial is
/// increasing and convex to the right of its largest real root.
pub fn perron_3x3(a: &[[f64; 3]; 3]) -> Result<PerronPair> {
    if a.iter().flatten().any(|x| *x < 0.0 || !x.is_finite()) {
        return Err(Error::InvalidInput(
            "perron_3x3 expects a finite nonnegative matrix".into(),
        ));
    }
    let trace = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    let poly = |x: f64| ((x - trace) * x + minors) * x - det;
    let deriv = |x: f64| (3.0 * x - 2.0 * trace) * x + minors;

    let mut lambda = a
        .iter()
        .map(|row| row.iter().sum::<f64>())
        .fold(0.0_f64, f64::max);
    for _ in 0..200 {
        let slope = deriv(lambda);
        if slope <= 0.0 {
            break;
        }
        let step = poly(lambda) / slope;
        let next = lambda - step;
        if !(next < lambda) {
            break;
        }
        lambda = next;
        if step.abs() <= 1e-17 * lambda.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }

    let b = [
        [a[0][0] - lambda, a[0][1], a[0][2]],
        [a[1][0], a[1][1] - lambda, a[1][2]],
        [a[2][0], a[2][1], a[2][2] - lambda],
    ];
    let cross = |u: &[f64; 3], w: &[f64; 3]| {
        [
            u[1] * w[2] - u[2] * w[1],
            u[2] * w[0] - u[0] * w[2],
            u[0] * w[1] - u[1] * w[0],
        ]
    };
    let norm = |u: &[f64; 3]| (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let candidates = [cross(&b[0], &b[1]), cross(&b[0], &b[2]), cross(&b[1], &b[2])];
    let mut best = candidates[0];
    for c in &candidates[1..] {
        if norm(c) > norm(&best) {
            best = *c;
        }
    }
    let scale = if best[2] != 0.0 { best[2] } else { norm(&best) };
    if scale == 0.0 {
        return Err(Error::InvalidInput(
            "degenerate 3x3 eigenvector (eigenvalue has geometric multiplicity > 1)".into(),
        ));
    }
    let vector = [best[0] / scale, best[1] / scale, best[2] / scale];
    Ok(PerronPair {
        value: lambda,
        vector,
    })
}
