//! Network topologies and the Laplacian-based mixing matrix.
//!
//! Agents are indexed `0..m`. A [`MixingMatrix`] is built as
//! `W = I − L / λ_max(L)` from the (weighted) graph Laplacian `L`, which makes
//! it symmetric, doubly stochastic and positive semidefinite, with
//! `λ₂(W) < 1` exactly when the graph is connected.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::symmetric_eigenvalues;
use crate::{Error, Result};

/// Number of reseeded draws attempted before giving up on a connected
/// Erdős–Rényi sample.
pub const ER_MAX_ATTEMPTS: usize = 100;

/// Undirected simple graph with positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    m: usize,
    // keyed by (i, j) with i < j
    edges: BTreeMap<(usize, usize), f64>,
}

impl Graph {
    pub fn empty(m: usize) -> Self {
        Graph {
            m,
            edges: BTreeMap::new(),
        }
    }

    /// Builds a graph from unit-weight edges.
    pub fn from_edges(m: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Graph::empty(m);
        for (i, j) in edges {
            g.add_edge(i, j, 1.0)?;
        }
        Ok(g)
    }

    /// Adds (or overwrites) the edge `{i, j}`.
    pub fn add_edge(&mut self, i: usize, j: usize, weight: f64) -> Result<()> {
        if i >= self.m || j >= self.m {
            return Err(Error::InvalidInput(format!(
                "edge ({i}, {j}) has an endpoint outside 0..{}",
                self.m
            )));
        }
        if i == j {
            return Err(Error::InvalidInput(format!("self-loop at agent {i}")));
        }
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "edge ({i}, {j}) has non-positive weight {weight}"
            )));
        }
        self.edges.insert((i.min(j), i.max(j)), weight);
        Ok(())
    }

    pub fn num_agents(&self) -> usize {
        self.m
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains_key(&(i.min(j), i.max(j)))
    }

    /// Edges as `(i, j, weight)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.m];
        for (i, j, _) in self.edges() {
            adj[i].push(j);
            adj[j].push(i);
        }
        adj
    }

    /// Number of connected components (breadth-first traversal).
    pub fn num_components(&self) -> usize {
        let adj = self.adjacency_lists();
        let mut seen = vec![false; self.m];
        let mut components = 0;
        for start in 0..self.m {
            if seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.m > 0 && self.num_components() == 1
    }

    /// Weighted graph Laplacian `L = D − A`.
    pub fn laplacian(&self) -> Array2<f64> {
        let mut l = Array2::zeros((self.m, self.m));
        for (i, j, w) in self.edges() {
            l[[i, j]] -= w;
            l[[j, i]] -= w;
            l[[i, i]] += w;
            l[[j, j]] += w;
        }
        l
    }

    /// Writes the edge-list text format: a first line with `m`, then one
    /// `i j [weight]` line per edge. The weight column is omitted for unit
    /// weights.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.m);
        for (i, j, w) in self.edges() {
            if w == 1.0 {
                out.push_str(&format!("{i} {j}\n"));
            } else {
                out.push_str(&format!("{i} {j} {w}\n"));
            }
        }
        out
    }

    pub fn parse_edge_list(text: &str, origin: &Path) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (first_no, first) = lines
            .next()
            .ok_or_else(|| parse_err(1, "missing agent count".into()))?;
        let m: usize = first
            .parse()
            .map_err(|_| parse_err(first_no, format!("bad agent count `{first}`")))?;
        let mut g = Graph::empty(m);
        for (no, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 && fields.len() != 3 {
                return Err(parse_err(no, format!("expected `i j [weight]`, got `{line}`")));
            }
            let idx = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| parse_err(no, format!("bad agent index `{s}`")))
            };
            let (i, j) = (idx(fields[0])?, idx(fields[1])?);
            let w = match fields.get(2) {
                Some(s) => s
                    .parse::<f64>()
                    .map_err(|_| parse_err(no, format!("bad weight `{s}`")))?,
                None => 1.0,
            };
            if g.has_edge(i, j) {
                return Err(parse_err(no, format!("duplicate edge ({i}, {j})")));
            }
            g.add_edge(i, j, w).map_err(|e| parse_err(no, e.to_string()))?;
        }
        Ok(g)
    }

    pub fn read_edge_list(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse_edge_list(&text, path)
    }

    pub fn write_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(self.to_edge_list().as_bytes())?;
        Ok(())
    }
}

/// Deterministic named topologies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Ring,
    Path,
    Complete,
    Star,
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ring" | "cycle" => Ok(Topology::Ring),
            "path" | "line" => Ok(Topology::Path),
            "complete" | "full" => Ok(Topology::Complete),
            "star" => Ok(Topology::Star),
            other => Err(Error::InvalidInput(format!("unknown topology `{other}`"))),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Ring => "ring",
            Topology::Path => "path",
            Topology::Complete => "complete",
            Topology::Star => "star",
        })
    }
}

pub fn generate_named(topology: Topology, m: usize) -> Result<Graph> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("topology needs m >= 2, got {m}")));
    }
    let mut g = Graph::empty(m);
    match topology {
        Topology::Ring => {
            for i in 0..m {
                g.add_edge(i, (i + 1) % m, 1.0)?;
            }
        }
        Topology::Path => {
            for i in 0..m - 1 {
                g.add_edge(i, i + 1, 1.0)?;
            }
        }
        Topology::Complete => {
            for i in 0..m {
                for j in i + 1..m {
                    g.add_edge(i, j, 1.0)?;
                }
            }
        }
        Topology::Star => {
            for j in 1..m {
                g.add_edge(0, j, 1.0)?;
            }
        }
    }
    Ok(g)
}

/// One G(m, p) draw: every unordered pair becomes an edge independently with
/// probability `p`. No connectivity check.
pub fn sample_erdos_renyi(m: usize, p: f64, seed: u64) -> Result<Graph> {
    if m < 2 {
        return Err(Error::InvalidInput(format!("Erdős–Rényi needs m >= 2, got {m}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidInput(format!("edge probability must be in (0, 1], got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Graph::empty(m);
    for i in 0..m {
        for j in i + 1..m {
            if rng.random::<f64>() < p {
                g.add_edge(i, j, 1.0)?;
            }
        }
    }
    Ok(g)
}

/// Connected Erdős–Rényi graph. Disconnected draws are retried with
/// `seed + 1, seed + 2, …` up to [`ER_MAX_ATTEMPTS`] draws in total.
pub fn generate_erdos_renyi(m: usize, p: f64, seed: u64) -> Result<Graph> {
    generate_erdos_renyi_with_attempts(m, p, seed, ER_MAX_ATTEMPTS)
}

pub fn generate_erdos_renyi_with_attempts(
    m: usize,
    p: f64,
    seed: u64,
    attempts: usize,
) -> Result<Graph> {
    for k in 0..attempts {
        let g = sample_erdos_renyi(m, p, seed.wrapping_add(k as u64))?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::DisconnectedSample { m, p, attempts })
}

/// Symmetric doubly stochastic mixing matrix with its cached spectrum.
#[derive(Debug, Clone)]
pub struct MixingMatrix {
    w: Array2<f64>,
    spectrum: Array1<f64>,
    lambda2: f64,
}

impl MixingMatrix {
    pub fn num_agents(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.w
    }

    /// Second-largest eigenvalue, clamped into `[0, 1]`.
    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    /// Spectral gap `1 − λ₂(W)`.
    pub fn gap(&self) -> f64 {
        1.0 - self.lambda2
    }

    /// All eigenvalues of `W`, ascending.
    pub fn spectrum(&self) -> &Array1<f64> {
        &self.spectrum
    }

    /// Wraps an explicit matrix after checking symmetry, unit row sums,
    /// `0 ⪯ W ⪯ I` and a simple unit eigenvalue.
    pub fn from_dense(w: Array2<f64>) -> Result<Self> {
        let m = w.nrows();
        if m < 2 || w.ncols() != m {
            return Err(Error::InvalidInput(format!(
                "mixing matrix must be square with m >= 2, got {}x{}",
                w.nrows(),
                w.ncols()
            )));
        }
        for i in 0..m {
            for j in 0..i {
                if w[[i, j]] != w[[j, i]] {
                    return Err(Error::InvalidInput(format!("W is not symmetric at ({i}, {j})")));
                }
            }
            let row: f64 = w.row(i).sum();
            if (row - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidInput(format!("row {i} of W sums to {row}")));
            }
        }
        let spectrum = symmetric_eigenvalues(w.view())?;
        if spectrum[0] < -1e-10 || spectrum[m - 1] > 1.0 + 1e-10 {
            return Err(Error::InvalidInput(format!(
                "W eigenvalues leave [0, 1]: [{}, {}]",
                spectrum[0],
                spectrum[m - 1]
            )));
        }
        let lambda2 = spectrum[m - 2].clamp(0.0, 1.0);
        if 1.0 - lambda2 <= 1e-10 {
            return Err(Error::Disconnected);
        }
        Ok(MixingMatrix {
            w,
            spectrum,
            lambda2,
        })
    }
}

/// `W = I − L / λ_max(L)` for a connected graph.
pub fn build_mixing_matrix(g: &Graph) -> Result<MixingMatrix> {
    let m = g.num_agents();
    if m < 2 {
        return Err(Error::InvalidInput(format!("mixing needs m >= 2 agents, got {m}")));
    }
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let lap = g.laplacian();
    let lmax = symmetric_eigenvalues(lap.view())?[m - 1];
    let mut w = lap.mapv(|x| -x / lmax);
    for i in 0..m {
        w[[i, i]] += 1.0;
    }
    // Diagonal entries are 1 − deg/λ_max; recompute them from the row so that
    // the row sums to one up to a single rounding.
    for i in 0..m {
        let off: f64 = (0..m).filter(|&j| j != i).map(|j| w[[i, j]]).sum();
        w[[i, i]] = 1.0 - off;
    }
    let spectrum = symmetric_eigenvalues(w.view())?;
    let lambda2 = spectrum[m - 2].clamp(0.0, 1.0);
    Ok(MixingMatrix {
        w,
        spectrum,
        lambda2,
    })
}

/// Spectral summary of a mixing matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralQuantities {
    pub lambda1: f64,
    pub lambda2: f64,
    pub gap: f64,
}

impl SpectralQuantities {
    /// Per-round contraction base `1 − √(1 − λ₂)` of accelerated gossip.
    pub fn contraction_base(&self) -> f64 {
        1.0 - self.gap.sqrt()
    }

    /// `ρ(K) = (1 − √(1 − λ₂))^K`.
    pub fn rho_for(&self, k: usize) -> f64 {
        self.contraction_base().powi(k as i32)
    }
}

pub fn spectral_quantities(w: &MixingMatrix) -> SpectralQuantities {
    let m = w.num_agents();
    SpectralQuantities {
        lambda1: w.spectrum()[m - 1],
        lambda2: w.lambda2(),
        gap: w.gap(),
    }
}
