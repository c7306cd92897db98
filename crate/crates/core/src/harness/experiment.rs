use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::config::{BaselineMethodConfig, ExperimentConfig, KMode, MudagMethodConfig, SigmaMode, TopologyKind};
use crate::baselines::{run_baseline, tune_step_size, BaselineConfig, BaselineMethod};
use crate::consensus::IterateBlock;
use crate::graph::MixingMatrix;
use crate::mudag::{run_mudag, theoretical_k, MudagConfig, MudagRun};
use crate::objective::{solve_reference, Problem, ReferenceSolution};
use crate::trace::{Reference, Trace};
use crate::{Error, Result};

/// A baseline is flagged degraded when, at Mudag's gradient budget, its gap
/// is at least this multiple of Mudag's.
pub const DEGRADED_FACTOR: f64 = 10.0;

pub const MANIFEST_FILE: &str = "manifest.toml";
pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seeds: Seeds,
    pub network: NetworkSummary,
    pub constants: ConstantsSummary,
    pub reference: ReferenceSummary,
    #[serde(default)]
    pub methods: BTreeMap<String, MethodSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub network: u64,
    pub problem: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSummary {
    pub topology: String,
    pub m: usize,
    pub edges: usize,
    pub p: Option<f64>,
    pub lambda2: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsSummary {
    #[serde(rename = "L")]
    pub l: f64,
    pub mu: f64,
    #[serde(rename = "M")]
    pub m_local: f64,
    pub kappa_g: f64,
    pub nu: Option<f64>,
    pub kappa_l: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    pub f_star: f64,
    pub grad_norm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodStatus {
    Ok,
    Degraded,
    Diverged,
    Error,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub status: Option<MethodStatus>,
    pub eta: Option<f64>,
    pub alpha: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub k_mode: Option<String>,
    pub momentum: Option<f64>,
    pub k_mix: Option<usize>,
    pub theta: Option<f64>,
    pub rho: Option<f64>,
    pub iterations_to_eps: Option<usize>,
    pub grad_evals_to_eps: Option<u64>,
    pub comm_to_eps: Option<u64>,
    pub final_f_gap: Option<f64>,
    pub diverged_at: Option<usize>,
    pub error: Option<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::Config(e.to_string()))?;
        fs::write(path, text)?;
        Ok(())
    }
}

/// Outcome of one method inside an experiment.
#[derive(Debug)]
pub struct MethodOutcome {
    pub name: String,
    pub summary: MethodSummary,
    /// Recorded trace (partial when the method diverged).
    pub trace: Option<Trace>,
    pub csv: Option<PathBuf>,
    pub error: Option<Error>,
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub output_dir: PathBuf,
    pub manifest: Manifest,
    pub methods: Vec<MethodOutcome>,
}

impl ExperimentReport {
    pub fn method(&self, name: &str) -> Option<&MethodOutcome> {
        self.methods.iter().find(|m| m.name == name)
    }
}

/// Everything shared by the methods of one experiment.
#[derive(Debug)]
pub struct Setup {
    pub mixing: MixingMatrix,
    pub edges: usize,
    pub problem: Problem,
    pub solution: ReferenceSolution,
    pub reference: Reference,
    pub x0: Array1<f64>,
}

impl Setup {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let (graph, mixing) = cfg.build_network()?;
        let problem = cfg.build_problem(graph.num_agents())?;
        let solution = solve_reference(&problem, cfg.run.reference_tol)?;
        let reference = solution.reference();
        let x0 = Array1::zeros(problem.dim());
        Ok(Setup {
            mixing,
            edges: graph.num_edges(),
            problem,
            solution,
            reference,
            x0,
        })
    }

    fn manifest(&self, cfg: &ExperimentConfig) -> Manifest {
        let c = self.problem.constants();
        let topology = match cfg.network.topology {
            TopologyKind::Er => "er",
            TopologyKind::Ring => "ring",
            TopologyKind::Path => "path",
            TopologyKind::Complete => "complete",
            TopologyKind::Star => "star",
            TopologyKind::File => "file",
        };
        Manifest {
            seeds: Seeds {
                network: cfg.network.seed,
                problem: cfg.problem.seed,
            },
            network: NetworkSummary {
                topology: topology.into(),
                m: self.mixing.num_agents(),
                edges: self.edges,
                p: cfg.network.p.filter(|_| cfg.network.topology == TopologyKind::Er),
                lambda2: self.mixing.lambda2(),
                gap: self.mixing.gap(),
            },
            constants: ConstantsSummary {
                l: c.l,
                mu: c.mu,
                m_local: c.m_local,
                kappa_g: c.kappa_g(),
                nu: c.nu,
                kappa_l: c.kappa_l(),
            },
            reference: ReferenceSummary {
                f_star: self.solution.f_star,
                grad_norm: self.solution.grad_norm,
                iterations: self.solution.iterations,
            },
            methods: BTreeMap::new(),
        }
    }
}

/// Runs every configured method and writes `<method>.csv` plus the manifest
/// into `out_dir`. Per-method failures are recorded and do not stop the
/// other methods.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentReport> {
    cfg.validate()?;
    let setup = Setup::build(cfg)?;
    fs::create_dir_all(out_dir)?;
    let mut manifest = setup.manifest(cfg);

    let names = cfg.method.selected();
    let results: Vec<(String, Result<Ran>)> = thread::scope(|scope| {
        let handles: Vec<_> = names
            .iter()
            .map(|&name| {
                let setup = &setup;
                let handle = scope.spawn(move || run_method(cfg, setup, name));
                (name, handle)
            })
            .collect();
        handles
            .into_iter()
            .map(|(name, h)| {
                let res = h.join().unwrap_or_else(|_| {
                    Err(Error::InvalidInput(format!("method `{name}` panicked")))
                });
                (name.to_string(), res)
            })
            .collect()
    });

    let mut outcomes = Vec::new();
    for (name, res) in results {
        let outcome = match res {
            Ok(ran) => {
                let csv = out_dir.join(format!("{name}.csv"));
                ran.trace.write_csv(&csv)?;
                let mut summary = ran.summary;
                summary.status = Some(MethodStatus::Ok);
                fill_progress(&mut summary, &ran.trace, cfg.run.eps);
                MethodOutcome {
                    name,
                    summary,
                    trace: Some(ran.trace),
                    csv: Some(csv),
                    error: None,
                }
            }
            Err(err) => {
                let err = err.with_method(&name);
                let mut summary = MethodSummary {
                    status: Some(MethodStatus::Error),
                    error: Some(err.to_string()),
                    ..Default::default()
                };
                let (mut trace, mut csv) = (None, None);
                if let Error::Method { source, .. } = &err {
                    if let Error::Diverged { t, partial, .. } = source.as_ref() {
                        summary.status = Some(MethodStatus::Diverged);
                        summary.diverged_at = Some(*t);
                        let path = out_dir.join(format!("{name}.csv"));
                        partial.write_csv(&path)?;
                        fill_progress(&mut summary, partial, cfg.run.eps);
                        trace = Some((**partial).clone());
                        csv = Some(path);
                    }
                }
                MethodOutcome {
                    name,
                    summary,
                    trace,
                    csv,
                    error: Some(err),
                }
            }
        };
        outcomes.push(outcome);
    }

    flag_degraded(&mut outcomes, cfg.run.eps);
    for o in &outcomes {
        manifest.methods.insert(o.name.clone(), o.summary.clone());
    }
    manifest.write(&out_dir.join(MANIFEST_FILE))?;
    Ok(ExperimentReport {
        output_dir: out_dir.to_path_buf(),
        manifest,
        methods: outcomes,
    })
}

struct Ran {
    trace: Trace,
    summary: MethodSummary,
}

fn run_method(cfg: &ExperimentConfig, setup: &Setup, name: &str) -> Result<Ran> {
    match name {
        "mudag" => run_mudag_method(
            cfg,
            setup,
            cfg.method.mudag.as_ref().cloned().unwrap_or_default(),
        ),
        other => {
            let method: BaselineMethod = other.parse()?;
            let bc = cfg.method.baseline(other).cloned().unwrap_or_default();
            run_baseline_method(cfg, setup, method, &bc)
        }
    }
}

fn run_mudag_method(cfg: &ExperimentConfig, setup: &Setup, mc: MudagMethodConfig) -> Result<Ran> {
    let p = &setup.problem;
    let mut base = MudagConfig::defaults(p, mc.k, cfg.run.t);
    if let Some(eta) = mc.eta {
        base.eta = eta;
    }
    if let Some(alpha) = mc.alpha {
        base.alpha = alpha;
    }
    base.form = mc.form.into();
    let reference = Some(&setup.reference);
    let mut summary = MethodSummary {
        eta: Some(base.eta),
        alpha: Some(base.alpha),
        ..Default::default()
    };

    let (k, run) = match mc.k_mode {
        KMode::Manual => (mc.k, run_mudag(p, &setup.mixing, &base, setup.x0.view(), reference)?),
        KMode::Theoretical => {
            let tk = theoretical_k(p, &setup.mixing, &base, setup.x0.view(), reference)?;
            summary.theta = Some(tk.theta);
            summary.rho = Some(tk.rho);
            let cfg_k = MudagConfig { k: tk.k, ..base };
            (tk.k, run_mudag(p, &setup.mixing, &cfg_k, setup.x0.view(), reference)?)
        }
        KMode::Tuned => tune_k(p, &setup.mixing, &base, &mc.k_values, setup, cfg.run.eps)?,
    };
    summary.k = Some(k);
    summary.k_mode = Some(
        match mc.k_mode {
            KMode::Manual => "manual",
            KMode::Theoretical => "theoretical",
            KMode::Tuned => "tuned",
        }
        .into(),
    );
    summary.warnings = run.warnings.clone();
    Ok(Ran {
        trace: run.trace,
        summary,
    })
}

/// Picks the `K` with the fewest communication rounds to the target gap.
fn tune_k(
    p: &Problem,
    w: &MixingMatrix,
    base: &MudagConfig,
    candidates: &[usize],
    setup: &Setup,
    eps: f64,
) -> Result<(usize, MudagRun)> {
    let mut best: Option<((bool, f64), usize, MudagRun)> = None;
    let mut last_err = None;
    for &k in candidates {
        let cfg = MudagConfig { k, ..*base };
        match run_mudag(p, w, &cfg, setup.x0.view(), Some(&setup.reference)) {
            Ok(run) => {
                let score = match run.trace.first_below_relative(eps) {
                    Some(r) => (false, r.comm_rounds as f64),
                    None => (true, run.trace.last().and_then(|r| r.f_gap).unwrap_or(f64::INFINITY)),
                };
                if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
                    best = Some((score, k, run));
                }
            }
            Err(e @ Error::Diverged { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    best.map(|(_, k, run)| (k, run))
        .ok_or_else(|| last_err.unwrap_or_else(|| Error::Config("no K candidates".into())))
}

fn run_baseline_method(
    cfg: &ExperimentConfig,
    setup: &Setup,
    method: BaselineMethod,
    bc: &BaselineMethodConfig,
) -> Result<Ran> {
    let p = &setup.problem;
    let x0 = IterateBlock::consensus(setup.x0.view(), p.num_agents());
    let mut template = BaselineConfig::new(method, 1.0 / p.constants().l, cfg.run.t);
    template.momentum = bc.momentum;
    if let Some(k) = bc.k_mix {
        template.k_mix = k;
    }
    let (eta, run) = match (bc.eta, method) {
        (Some(eta), _) => {
            let c = BaselineConfig { eta, ..template };
            (eta, run_baseline(p, &setup.mixing, &c, &x0, Some(&setup.reference))?)
        }
        (None, BaselineMethod::Agd) => (
            template.eta,
            run_baseline(p, &setup.mixing, &template, &x0, Some(&setup.reference))?,
        ),
        (None, _) => {
            let tuned = tune_step_size(
                p,
                &setup.mixing,
                &template,
                &x0,
                &setup.reference,
                cfg.run.tune_depth,
                cfg.run.eps,
            )?;
            (tuned.eta, tuned.run)
        }
    };
    let summary = MethodSummary {
        eta: Some(eta),
        momentum: (method == BaselineMethod::Agd)
            .then(|| bc.momentum.unwrap_or_else(|| crate::baselines::default_momentum(p))),
        k_mix: (method == BaselineMethod::Dgd).then_some(template.k_mix),
        ..Default::default()
    };
    Ok(Ran {
        trace: run.trace,
        summary,
    })
}

fn fill_progress(summary: &mut MethodSummary, trace: &Trace, eps: f64) {
    if let Some(r) = trace.first_below_relative(eps) {
        summary.iterations_to_eps = Some(r.t);
        summary.grad_evals_to_eps = Some(r.grad_evals);
        summary.comm_to_eps = Some(r.comm_rounds);
    }
    summary.final_f_gap = trace.last().and_then(|r| r.f_gap);
}

/// Last recorded gap within a gradient-evaluation budget.
pub fn gap_at_budget(trace: &Trace, grad_evals: u64) -> Option<f64> {
    trace
        .iter()
        .take_while(|r| r.grad_evals <= grad_evals)
        .last()
        .and_then(|r| r.f_gap)
}

fn flag_degraded(outcomes: &mut [MethodOutcome], eps: f64) {
    let Some(reference) = outcomes
        .iter()
        .find(|o| o.name == "mudag" && o.summary.status == Some(MethodStatus::Ok))
        .and_then(|o| o.trace.as_ref())
    else {
        return;
    };
    let budget = reference
        .first_below_relative(eps)
        .or(reference.last())
        .map(|r| r.grad_evals)
        .unwrap_or(0);
    let Some(mudag_gap) = gap_at_budget(reference, budget) else {
        return;
    };
    let floor = mudag_gap.abs().max(f64::MIN_POSITIVE);
    for o in outcomes.iter_mut().filter(|o| o.name != "mudag") {
        if o.summary.status != Some(MethodStatus::Ok) {
            continue;
        }
        let gap = o.trace.as_ref().and_then(|t| gap_at_budget(t, budget));
        if gap.is_some_and(|g| g >= DEGRADED_FACTOR * floor) {
            o.summary.status = Some(MethodStatus::Degraded);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    K,
    P,
    Sigma,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "K" | "k" => Ok(SweepAxis::K),
            "p" => Ok(SweepAxis::P),
            "sigma" => Ok(SweepAxis::Sigma),
            other => Err(Error::InvalidInput(format!(
                "unknown sweep axis `{other}` (expected K, p or sigma)"
            ))),
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::K => "K",
            SweepAxis::P => "p",
            SweepAxis::Sigma => "sigma",
        })
    }
}

/// One row of a sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub method: String,
    pub gap: f64,
    pub status: MethodStatus,
    pub iterations_to_eps: Option<usize>,
    pub comm_to_eps: Option<u64>,
    pub final_f_gap: Option<f64>,
}

pub const SUMMARY_HEADER: &str = "value,method,spectral_gap,status,iterations_to_eps,comm_to_eps,final_f_gap";

/// Returns a copy of `cfg` with one axis set to `value`.
pub fn apply_axis(cfg: &ExperimentConfig, axis: SweepAxis, value: f64) -> Result<ExperimentConfig> {
    let mut out = cfg.clone();
    match axis {
        SweepAxis::K => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(Error::InvalidInput(format!("K must be a non-negative integer, got {value}")));
            }
            let mc = out.method.mudag.get_or_insert_with(Default::default);
            mc.k_mode = KMode::Manual;
            mc.k = value as usize;
        }
        SweepAxis::P => {
            if out.network.topology != TopologyKind::Er {
                return Err(Error::Config("sweeping p needs an `er` network".into()));
            }
            out.network.p = Some(value);
        }
        SweepAxis::Sigma => match out.problem.sigma.mode {
            SigmaMode::Uniform => out.problem.sigma.value = value,
            SigmaMode::Nonconvex => out.problem.sigma.a = Some(value),
        },
    }
    out.validate()?;
    Ok(out)
}

/// Runs the experiment once per value into `out_dir/<axis>_<value>/` and
/// writes `summary.csv`.
pub fn sweep(cfg: &ExperimentConfig, axis: SweepAxis, values: &[f64], out_dir: &Path) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one value".into()));
    }
    fs::create_dir_all(out_dir)?;
    let mut rows = Vec::new();
    for &value in values {
        let run_cfg = apply_axis(cfg, axis, value)?;
        let dir = out_dir.join(format!("{axis}_{value}"));
        let report = run_experiment(&run_cfg, &dir)?;
        for m in &report.methods {
            rows.push(SweepRow {
                value,
                method: m.name.clone(),
                gap: report.manifest.network.gap,
                status: m.summary.status.unwrap_or(MethodStatus::Error),
                iterations_to_eps: m.summary.iterations_to_eps,
                comm_to_eps: m.summary.comm_to_eps,
                final_f_gap: m.summary.final_f_gap,
            });
        }
    }
    fs::write(out_dir.join(SUMMARY_FILE), summary_csv(&rows))?;
    Ok(rows)
}

pub fn summary_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        let status = match r.status {
            MethodStatus::Ok => "ok",
            MethodStatus::Degraded => "degraded",
            MethodStatus::Diverged => "diverged",
            MethodStatus::Error => "error",
        };
        let _ = writeln!(
            out,
            "{},{},{:e},{},{},{},{}",
            r.value,
            r.method,
            r.gap,
            status,
            opt(r.iterations_to_eps.map(|v| v.to_string())),
            opt(r.comm_to_eps.map(|v| v.to_string())),
            opt(r.final_f_gap.map(|v| format!("{v:e}"))),
        );
    }
    out
}
