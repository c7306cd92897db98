//! Per-iteration metrics shared by Mudag and the baselines, and their CSV
//! form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, ArrayView1};

use crate::consensus::{consensus_error, IterateBlock};
use crate::objective::Problem;
use crate::{Error, Result};

/// Column order of the CSV form.
pub const CSV_HEADER: &str = "t,f_gap,consensus_err,dist_to_opt_sq,V_t,grad_evals,comm_rounds";

/// Divergence threshold: the objective gap may not grow beyond this multiple
/// of its starting value.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: usize,
    /// `f(x̄_t) − f*`, absent when no reference optimum is known.
    pub f_gap: Option<f64>,
    /// `‖𝐱_t − 𝟏x̄_t‖`.
    pub consensus_err: f64,
    /// `‖𝐱_t − 𝟏x*‖²`.
    pub dist_to_opt_sq: Option<f64>,
    /// Lyapunov value, Mudag only.
    pub v_t: Option<f64>,
    pub grad_evals: u64,
    pub comm_rounds: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new() -> Self {
        Trace::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn first(&self) -> Option<&TraceRecord> {
        self.records.first()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TraceRecord> {
        self.records.iter()
    }

    /// First record whose gap relative to the starting gap is at most `eps`.
    pub fn first_below_relative(&self, eps: f64) -> Option<&TraceRecord> {
        let gap0 = self.first()?.f_gap?;
        if gap0 <= 0.0 {
            return self.first();
        }
        self.records
            .iter()
            .find(|r| r.f_gap.is_some_and(|g| g <= eps * gap0))
    }

    /// First record whose absolute gap is at most `eps`.
    pub fn first_below(&self, eps: f64) -> Option<&TraceRecord> {
        self.records
            .iter()
            .find(|r| r.f_gap.is_some_and(|g| g <= eps))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        let opt = |v: Option<f64>| v.map(|v| format!("{v:e}")).unwrap_or_default();
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{:e},{},{},{},{}",
                r.t,
                opt(r.f_gap),
                r.consensus_err,
                opt(r.dist_to_opt_sq),
                opt(r.v_t),
                r.grad_evals,
                r.comm_rounds
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn parse_csv(text: &str, origin: &Path) -> Result<Trace> {
        let err = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == CSV_HEADER => {}
            Some((_, header)) => return Err(err(1, format!("unexpected header {header:?}"))),
            None => return Err(err(1, "empty trace file".into())),
        }
        let mut trace = Trace::new();
        for (n, line) in lines {
            let line_no = n + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 7 {
                return Err(err(line_no, format!("expected 7 columns, got {}", cells.len())));
            }
            let float = |s: &str| -> Result<Option<f64>> {
                if s.is_empty() {
                    return Ok(None);
                }
                s.parse()
                    .map(Some)
                    .map_err(|_| err(line_no, format!("invalid number {s:?}")))
            };
            let int = |s: &str| -> Result<u64> {
                s.parse()
                    .map_err(|_| err(line_no, format!("invalid counter {s:?}")))
            };
            trace.push(TraceRecord {
                t: int(cells[0])? as usize,
                f_gap: float(cells[1])?,
                consensus_err: float(cells[2])?
                    .ok_or_else(|| err(line_no, "missing consensus error".into()))?,
                dist_to_opt_sq: float(cells[3])?,
                v_t: float(cells[4])?,
                grad_evals: int(cells[5])?,
                comm_rounds: int(cells[6])?,
            });
        }
        Ok(trace)
    }

    pub fn read_csv(path: &Path) -> Result<Trace> {
        let text = fs::read_to_string(path)?;
        Trace::parse_csv(&text, path)
    }
}

/// Known optimum used to measure progress.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub x_star: Array1<f64>,
    pub f_star: f64,
}

/// Builds trace records and watches for divergence.
#[derive(Debug)]
pub(crate) struct Recorder<'a> {
    problem: &'a Problem,
    reference: Option<&'a Reference>,
    baseline: Option<f64>,
    pub trace: Trace,
}

impl<'a> Recorder<'a> {
    pub fn new(problem: &'a Problem, reference: Option<&'a Reference>) -> Self {
        Recorder {
            problem,
            reference,
            baseline: None,
            trace: Trace::new(),
        }
    }

    /// Records one iterate block.
    pub fn block(
        &mut self,
        t: usize,
        x: &IterateBlock,
        v_t: Option<f64>,
        grad_evals: u64,
        comm_rounds: u64,
    ) -> Result<()> {
        if !x.is_finite() {
            return self.diverged(t, "non-finite iterate".into());
        }
        let mean = x.mean_row();
        let dist = self.reference.map(|r| {
            x.rows()
                .into_iter()
                .map(|row| (&row - &r.x_star).mapv(|v| v * v).sum())
                .sum::<f64>()
        });
        self.push(t, mean.view(), consensus_error(x), dist, v_t, grad_evals, comm_rounds)
    }

    /// Records a single (centralized) iterate.
    pub fn point(
        &mut self,
        t: usize,
        x: ArrayView1<'_, f64>,
        grad_evals: u64,
        comm_rounds: u64,
    ) -> Result<()> {
        if x.iter().any(|v| !v.is_finite()) {
            return self.diverged(t, "non-finite iterate".into());
        }
        let m = self.problem.num_agents() as f64;
        let dist = self
            .reference
            .map(|r| m * (&x - &r.x_star).mapv(|v| v * v).sum());
        self.push(t, x, 0.0, dist, None, grad_evals, comm_rounds)
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        t: usize,
        mean: ArrayView1<'_, f64>,
        consensus_err: f64,
        dist_to_opt_sq: Option<f64>,
        v_t: Option<f64>,
        grad_evals: u64,
        comm_rounds: u64,
    ) -> Result<()> {
        let f = self.problem.value(mean);
        if !f.is_finite() {
            return self.diverged(t, "non-finite objective".into());
        }
        let f_gap = self.reference.map(|r| f - r.f_star);
        // progress is measured against f* when known, otherwise against f(x̄₀)
        let excess = match self.reference {
            Some(r) => f - r.f_star,
            None => f,
        };
        match self.baseline {
            None => {
                let floor = f64::EPSILON * (1.0 + self.reference.map_or(f.abs(), |r| r.f_star.abs()));
                self.baseline = Some(excess.abs().max(floor));
            }
            Some(base) => {
                if excess > DIVERGENCE_FACTOR * base {
                    return self.diverged(
                        t,
                        format!("objective gap {excess:e} exceeds {DIVERGENCE_FACTOR:e} times its initial value"),
                    );
                }
            }
        }
        self.trace.push(TraceRecord {
            t,
            f_gap,
            consensus_err,
            dist_to_opt_sq,
            v_t,
            grad_evals,
            comm_rounds,
        });
        Ok(())
    }

    fn diverged(&mut self, t: usize, reason: String) -> Result<()> {
        Err(Error::Diverged {
            t,
            reason,
            partial: Box::new(std::mem::take(&mut self.trace)),
        })
    }
}
