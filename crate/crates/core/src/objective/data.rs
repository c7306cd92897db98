use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result};

/// Dense binary classification data with labels in `{−1, +1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Array1<f64>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Array1<f64>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                what: "feature rows vs labels",
                expected: features.nrows(),
                got: labels.len(),
            });
        }
        if let Some(bad) = labels.iter().find(|&&b| b != 1.0 && b != -1.0) {
            return Err(Error::InvalidInput(format!("label {bad} is not ±1")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite feature value".into()));
        }
        Ok(Dataset { features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &Array1<f64> {
        &self.labels
    }

    fn select(&self, rows: &[usize]) -> Dataset {
        let d = self.dim();
        let mut features = Array2::zeros((rows.len(), d));
        let mut labels = Array1::zeros(rows.len());
        for (k, &r) in rows.iter().enumerate() {
            features.row_mut(k).assign(&self.features.row(r));
            labels[k] = self.labels[r];
        }
        Dataset { features, labels }
    }
}

/// Parses sparse LIBSVM text (`label idx:val idx:val ...`, 1-based indices).
///
/// Label `0` is read as `−1`. When `dim` is given, indices beyond it are an
/// error; otherwise the dimension is the largest index seen.
pub fn parse_libsvm(text: &str, origin: &Path, dim: Option<usize>) -> Result<Dataset> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_err(line_no, format!("invalid label {label_tok:?}")))?;
        let label = match label {
            1.0 => 1.0,
            -1.0 | 0.0 => -1.0,
            l => return Err(parse_err(line_no, format!("label {l} is not binary"))),
        };
        let mut entries = Vec::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(line_no, format!("expected idx:value, got {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid feature index {idx:?}")))?;
            if idx == 0 {
                return Err(parse_err(line_no, "feature indices are 1-based".into()));
            }
            if let Some(d) = dim {
                if idx > d {
                    return Err(parse_err(
                        line_no,
                        format!("feature index {idx} exceeds dimension {d}"),
                    ));
                }
            }
            let val: f64 = val
                .parse()
                .map_err(|_| parse_err(line_no, format!("invalid feature value {val:?}")))?;
            if !val.is_finite() {
                return Err(parse_err(line_no, format!("non-finite feature value {val}")));
            }
            max_index = max_index.max(idx);
            entries.push((idx - 1, val));
        }
        rows.push(entries);
        labels.push(label);
    }
    let d = dim.unwrap_or(max_index);
    let mut features = Array2::zeros((rows.len(), d));
    for (r, entries) in rows.iter().enumerate() {
        for &(c, v) in entries {
            features[[r, c]] = v;
        }
    }
    Dataset::new(features, Array1::from(labels))
}

pub fn load_libsvm(path: &Path, dim: Option<usize>) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    parse_libsvm(&text, path, dim)
}

/// Shuffles samples with `seed` and cuts them into `m` contiguous shards of
/// `⌊n/m⌋` samples each; the remainder is dropped.
pub fn partition(data: &Dataset, m: usize, seed: u64) -> Result<Vec<Dataset>> {
    if m == 0 {
        return Err(Error::InvalidInput("cannot partition into zero agents".into()));
    }
    let per = data.len() / m;
    if per == 0 {
        return Err(Error::InvalidInput(format!(
            "{} samples cannot fill {m} agents",
            data.len()
        )));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(order
        .chunks_exact(per)
        .take(m)
        .map(|rows| data.select(rows))
        .collect())
}

/// Synthetic logistic data: standard Gaussian features, labels from a
/// planted Gaussian separator, each label flipped with probability `noise`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub m: usize,
    pub n_per_agent: usize,
    pub d: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            m: 20,
            n_per_agent: 50,
            d: 20,
            noise: 0.1,
            seed: 0,
        }
    }
}

/// Returns one shard per agent.
pub fn synthetic_logistic(spec: &SyntheticSpec) -> Result<Vec<Dataset>> {
    let SyntheticSpec {
        m,
        n_per_agent,
        d,
        noise,
        seed,
    } = *spec;
    if m == 0 || n_per_agent == 0 || d == 0 {
        return Err(Error::InvalidInput(format!(
            "synthetic data needs m, n, d >= 1 (m={m}, n={n_per_agent}, d={d})"
        )));
    }
    if !(0.0..=0.5).contains(&noise) {
        return Err(Error::InvalidInput(format!("label noise {noise} outside [0, 0.5]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let separator: Array1<f64> = Array1::from_shape_fn(d, |_| StandardNormal.sample(&mut rng));
    let mut shards = Vec::with_capacity(m);
    for _ in 0..m {
        let features: Array2<f64> =
            Array2::from_shape_fn((n_per_agent, d), |_| StandardNormal.sample(&mut rng));
        let scores = features.dot(&separator);
        let labels = scores.mapv(|s| {
            let clean = if s >= 0.0 { 1.0 } else { -1.0 };
            if rng.random::<f64>() < noise {
                -clean
            } else {
                clean
            }
        });
        shards.push(Dataset::new(features, labels)?);
    }
    Ok(shards)
}
