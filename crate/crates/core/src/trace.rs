//! Per-iteration run logs shared by every solver.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    /// Outer iteration index.
    pub k: usize,
    /// `F(x^k)`.
    pub objective: f64,
    /// `Δ(x^k)/‖x⋆‖`, NaN without ground truth.
    pub rel_err: f64,
    /// Step parameter used at `x^k` (`α_k`, `λ_k` or `t_k`).
    pub step: f64,
    /// Inner iterations spent on the subproblem at `x^k`.
    pub inner_iters: usize,
    pub cum_inner: usize,
    /// Milliseconds since the run started.
    pub wall_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Converged,
    FixedPoint,
    Diverged,
    InnerFailure,
    MaxIter,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::FixedPoint => "fixed_point",
            RunStatus::Diverged => "diverged",
            RunStatus::InnerFailure => "inner_failure",
            RunStatus::MaxIter => "max_iter",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RunStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "converged" => RunStatus::Converged,
            "fixed_point" => RunStatus::FixedPoint,
            "diverged" => RunStatus::Diverged,
            "inner_failure" => RunStatus::InnerFailure,
            "max_iter" => RunStatus::MaxIter,
            other => return Err(format!("unknown status {other:?}")),
        })
    }
}

/// Non-fatal events recorded during a run.
#[derive(Clone, Debug, PartialEq)]
pub enum TraceWarning {
    /// Polyak step would have been negative because `F(x^k) < f⋆`.
    StepClipped { k: usize, objective: f64 },
}

/// Why an inner solve was rejected.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerFailureInfo {
    pub k: usize,
    pub inner_iters: usize,
    pub gap: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, Default)]
pub struct RunTrace {
    records: Vec<TraceRecord>,
    status: Option<RunStatus>,
    pub warnings: Vec<TraceWarning>,
    pub inner_failure: Option<InnerFailureInfo>,
}

impl RunTrace {
    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn status(&self) -> Option<RunStatus> {
        self.status
    }

    pub fn push(&mut self, record: TraceRecord) {
        debug_assert!(self.status.is_none(), "record pushed after termination");
        if let Some(prev) = self.records.last() {
            debug_assert!(record.k > prev.k);
            debug_assert!(record.cum_inner >= prev.cum_inner);
        }
        self.records.push(record);
    }

    /// Sets the terminal status. Panics if called twice.
    pub fn finish(&mut self, status: RunStatus) {
        assert!(self.status.is_none(), "run status already set to {:?}", self.status);
        self.status = Some(status);
    }

    /// Final relative error, NaN if unknown.
    pub fn final_rel_err(&self) -> f64 {
        self.last().map_or(f64::NAN, |r| r.rel_err)
    }

    pub fn main_iterations(&self) -> usize {
        self.last().map_or(0, |r| r.k)
    }

    pub fn wall_ms(&self) -> f64 {
        self.last().map_or(0.0, |r| r.wall_ms)
    }
}

/// Final iterate plus its trace.
#[derive(Clone, Debug)]
pub struct SolverRun {
    pub x: Vec<f64>,
    pub trace: RunTrace,
}

pub(crate) struct Clock(Instant);

impl Clock {
    pub fn start() -> Self {
        Clock(Instant::now())
    }

    pub fn ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}
