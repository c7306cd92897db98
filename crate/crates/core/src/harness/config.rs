//! TOML experiment description.
//!
//! ```toml
//! [network]
//! topology = "er"        # er | ring | path | complete | star | file
//! m = 100
//! p = 0.5
//! seed = 1
//!
//! [problem]
//! family = "logistic"    # logistic | quadratic
//! source = "synthetic"   # synthetic | libsvm
//! n_per_agent = 100
//! d = 50
//!
//! [problem.sigma]
//! mode = "uniform"       # uniform | nonconvex
//! value = 1e-3
//!
//! [run]
//! T = 800
//! output_dir = "figure1"
//!
//! [method.mudag]
//! k_mode = "tuned"
//!
//! [method.extra]
//! ```
//!
//! Every `[method.<name>]` table that is present selects that method.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::graph::{build_mixing_matrix, generate_erdos_renyi, generate_named, Graph, MixingMatrix, Topology};
use crate::mudag::Form;
use crate::objective::{
    load_libsvm, logistic_problem, partition, random_quadratic, synthetic_logistic, Problem,
    RandomQuadraticSpec, SyntheticSpec,
};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub network: NetworkConfig,
    pub problem: ProblemConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub method: MethodsConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyKind {
    Er,
    Ring,
    Path,
    Complete,
    Star,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub topology: TopologyKind,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Edge-list file for `topology = "file"`.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Logistic,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    #[default]
    Synthetic,
    Libsvm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub family: FamilyKind,
    #[serde(default)]
    pub source: DataSource,
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Feature dimension for LIBSVM files; inferred when absent.
    #[serde(default)]
    pub dim: Option<usize>,
    #[serde(default = "defaults::n_per_agent")]
    pub n_per_agent: usize,
    #[serde(default = "defaults::d")]
    pub d: usize,
    #[serde(default = "defaults::noise")]
    pub noise: f64,
    #[serde(default = "defaults::kappa")]
    pub kappa: f64,
    #[serde(default = "defaults::heterogeneity")]
    pub heterogeneity: f64,
    #[serde(default = "defaults::one")]
    pub shift_scale: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sigma: SigmaConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SigmaMode {
    #[default]
    Uniform,
    Nonconvex,
}

/// Per-agent regularizers: `σ_i = value` for all `i`, or `σ_i = a` for
/// `i < m` and `σ_m = b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaConfig {
    #[serde(default)]
    pub mode: SigmaMode,
    #[serde(default = "defaults::sigma")]
    pub value: f64,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
}

impl Default for SigmaConfig {
    fn default() -> Self {
        SigmaConfig {
            mode: SigmaMode::Uniform,
            value: defaults::sigma(),
            a: None,
            b: None,
        }
    }
}

impl SigmaConfig {
    pub fn schedule(&self, m: usize) -> Result<Vec<f64>> {
        match self.mode {
            SigmaMode::Uniform => Ok(vec![self.value; m]),
            SigmaMode::Nonconvex => {
                let (a, b) = self.a.zip(self.b).ok_or_else(|| {
                    Error::Config("sigma mode `nonconvex` needs both `a` and `b`".into())
                })?;
                let mut out = vec![a; m];
                out[m - 1] = b;
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "T", default = "defaults::iterations")]
    pub t: usize,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "defaults::reference_tol")]
    pub reference_tol: f64,
    /// Relative f-gap target for iterations-to-ε.
    #[serde(default = "defaults::eps")]
    pub eps: f64,
    /// Largest `k` in the baseline step-size grid `2^−k/M`.
    #[serde(default = "defaults::tune_depth")]
    pub tune_depth: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            t: defaults::iterations(),
            output_dir: defaults::output_dir(),
            reference_tol: defaults::reference_tol(),
            eps: defaults::eps(),
            tune_depth: defaults::tune_depth(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodsConfig {
    #[serde(default)]
    pub mudag: Option<MudagMethodConfig>,
    #[serde(default)]
    pub agd: Option<BaselineMethodConfig>,
    #[serde(default)]
    pub dgd: Option<BaselineMethodConfig>,
    #[serde(default)]
    pub extra: Option<BaselineMethodConfig>,
    #[serde(default)]
    pub nids: Option<BaselineMethodConfig>,
}

impl MethodsConfig {
    /// Names of the selected methods in canonical order.
    pub fn selected(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.mudag.is_some() {
            out.push("mudag");
        }
        for (name, cfg) in [
            ("agd", &self.agd),
            ("dgd", &self.dgd),
            ("extra", &self.extra),
            ("nids", &self.nids),
        ] {
            if cfg.is_some() {
                out.push(name);
            }
        }
        out
    }

    pub fn baseline(&self, name: &str) -> Option<&BaselineMethodConfig> {
        match name {
            "agd" => self.agd.as_ref(),
            "dgd" => self.dgd.as_ref(),
            "extra" => self.extra.as_ref(),
            "nids" => self.nids.as_ref(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KMode {
    #[default]
    Manual,
    Theoretical,
    Tuned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    #[default]
    Direct,
    Tracking,
}

impl From<FormKind> for Form {
    fn from(f: FormKind) -> Form {
        match f {
            FormKind::Direct => Form::Direct,
            FormKind::Tracking => Form::Tracking,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MudagMethodConfig {
    #[serde(default)]
    pub k_mode: KMode,
    #[serde(rename = "K", default = "defaults::k")]
    pub k: usize,
    /// Candidates for `k_mode = "tuned"`.
    #[serde(rename = "K_values", default = "defaults::k_values")]
    pub k_values: Vec<usize>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub form: FormKind,
}

impl Default for MudagMethodConfig {
    fn default() -> Self {
        MudagMethodConfig {
            k_mode: KMode::Manual,
            k: defaults::k(),
            k_values: defaults::k_values(),
            eta: None,
            alpha: None,
            form: FormKind::Direct,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineMethodConfig {
    /// Fixed step size; tuned on the grid when absent (AGD uses `1/L`).
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub momentum: Option<f64>,
    #[serde(default)]
    pub k_mix: Option<usize>,
}

mod defaults {
    use std::path::PathBuf;

    pub fn n_per_agent() -> usize {
        50
    }
    pub fn d() -> usize {
        20
    }
    pub fn noise() -> f64 {
        0.1
    }
    pub fn kappa() -> f64 {
        100.0
    }
    pub fn heterogeneity() -> f64 {
        1.0
    }
    pub fn one() -> f64 {
        1.0
    }
    pub fn sigma() -> f64 {
        1e-3
    }
    pub fn iterations() -> usize {
        500
    }
    pub fn output_dir() -> PathBuf {
        PathBuf::from("out")
    }
    pub fn reference_tol() -> f64 {
        1e-10
    }
    pub fn eps() -> f64 {
        1e-8
    }
    pub fn tune_depth() -> u32 {
        10
    }
    pub fn k() -> usize {
        2
    }
    pub fn k_values() -> Vec<usize> {
        (1..=8).collect()
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)
            .map_err(|e| Error::Config(format!("{}: {}", origin.display(), e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text, path)?;
        // relative data paths are resolved against the config's directory
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.network.path, &mut cfg.problem.path].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let n = &self.network;
        match n.topology {
            TopologyKind::File => {
                if n.path.is_none() {
                    return Err(Error::Config("network topology `file` needs `path`".into()));
                }
            }
            TopologyKind::Er => {
                if n.m.is_none() || n.p.is_none() {
                    return Err(Error::Config("network topology `er` needs `m` and `p`".into()));
                }
            }
            _ => {
                if n.m.is_none() {
                    return Err(Error::Config("network needs `m`".into()));
                }
            }
        }
        let p = &self.problem;
        if p.source == DataSource::Libsvm && p.path.is_none() {
            return Err(Error::Config("problem source `libsvm` needs `path`".into()));
        }
        if p.family == FamilyKind::Logistic {
            if let Some(m) = n.m {
                let sigmas = p.sigma.schedule(m.max(1))?;
                let mean = sigmas.iter().sum::<f64>() / sigmas.len() as f64;
                if !(mean > 0.0) {
                    return Err(Error::Config(format!(
                        "sigma schedule has non-positive mean {mean}; the objective would not be strongly convex"
                    )));
                }
            }
        }
        if !(self.run.eps > 0.0 && self.run.reference_tol > 0.0) {
            return Err(Error::Config("`eps` and `reference_tol` must be positive".into()));
        }
        if let Some(mc) = &self.method.mudag {
            if mc.k_mode == KMode::Tuned && mc.k_values.is_empty() {
                return Err(Error::Config("`K_values` must not be empty for k_mode = \"tuned\"".into()));
            }
        }
        Ok(())
    }

    pub fn build_graph(&self) -> Result<Graph> {
        let n = &self.network;
        match n.topology {
            TopologyKind::Er => generate_erdos_renyi(n.m.unwrap_or(0), n.p.unwrap_or(0.0), n.seed),
            TopologyKind::File => Graph::read_edge_list(n.path.as_deref().unwrap_or(Path::new(""))),
            named => {
                let topology = match named {
                    TopologyKind::Ring => Topology::Ring,
                    TopologyKind::Path => Topology::Path,
                    TopologyKind::Complete => Topology::Complete,
                    _ => Topology::Star,
                };
                generate_named(topology, n.m.unwrap_or(0))
            }
        }
    }

    pub fn build_network(&self) -> Result<(Graph, MixingMatrix)> {
        let g = self.build_graph()?;
        let w = build_mixing_matrix(&g)?;
        Ok((g, w))
    }

    pub fn build_problem(&self, m: usize) -> Result<Problem> {
        let p = &self.problem;
        match p.family {
            FamilyKind::Quadratic => random_quadratic(&RandomQuadraticSpec {
                m,
                d: p.d,
                kappa: p.kappa,
                heterogeneity: p.heterogeneity,
                shift_scale: p.shift_scale,
                seed: p.seed,
            }),
            FamilyKind::Logistic => {
                let shards = match p.source {
                    DataSource::Synthetic => synthetic_logistic(&SyntheticSpec {
                        m,
                        n_per_agent: p.n_per_agent,
                        d: p.d,
                        noise: p.noise,
                        seed: p.seed,
                    })?,
                    DataSource::Libsvm => {
                        let data = load_libsvm(p.path.as_deref().unwrap_or(Path::new("")), p.dim)?;
                        partition(&data, m, p.seed)?
                    }
                };
                logistic_problem(&shards, &p.sigma.schedule(m)?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[network]
topology = "ring"
m = 6

[problem]
family = "quadratic"
d = 3
kappa = 10.0

[method.mudag]
K = 3

[method.extra]
eta = 0.01
"#;

    #[test]
    fn parses_and_fills_defaults() {
        let cfg = ExperimentConfig::parse(MINIMAL, Path::new("x.toml")).unwrap();
        assert_eq!(cfg.method.selected(), vec!["mudag", "extra"]);
        assert_eq!(cfg.method.mudag.as_ref().unwrap().k, 3);
        assert_eq!(cfg.run.t, 500);
        let (g, _) = cfg.build_network().unwrap();
        assert_eq!(g.num_edges(), 6);
        let p = cfg.build_problem(6).unwrap();
        assert_eq!(p.dim(), 3);
        let again = ExperimentConfig::parse(&cfg.to_toml().unwrap(), Path::new("y.toml")).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_schedules() {
        let bad = MINIMAL.replace("kappa = 10.0", "kapa = 10.0");
        assert!(matches!(
            ExperimentConfig::parse(&bad, Path::new("x.toml")),
            Err(Error::Config(_))
        ));
        let bad = MINIMAL.replace("[method.extra]", "[method.adam]");
        assert!(ExperimentConfig::parse(&bad, Path::new("x.toml")).is_err());
        let bad = r#"
[network]
topology = "ring"
m = 4
[problem]
family = "logistic"
[problem.sigma]
mode = "nonconvex"
a = -1.0
b = 1.0
"#;
        assert!(ExperimentConfig::parse(bad, Path::new("x.toml")).is_err());
        let bad = "[network]\ntopology = \"er\"\nm = 4\n[problem]\nfamily = \"quadratic\"\n";
        assert!(ExperimentConfig::parse(bad, Path::new("x.toml")).is_err());
    }

    #[test]
    fn sigma_schedules() {
        let s = SigmaConfig {
            mode: SigmaMode::Nonconvex,
            value: 0.0,
            a: Some(-0.01),
            b: Some(1.0),
        };
        assert_eq!(s.schedule(3).unwrap(), vec![-0.01, -0.01, 1.0]);
        assert_eq!(SigmaConfig::default().schedule(2).unwrap(), vec![1e-3, 1e-3]);
    }
}
