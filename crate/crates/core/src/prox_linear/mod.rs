//! Inexact proximal-linear methods.
//!
//! Each outer iteration linearizes the squared measurements at `x^k`, solves
//! the resulting strongly convex ℓ1 subproblem inexactly with an accelerated
//! dual (APG) or primal-dual (APD) method, and accepts the step once a
//! duality-gap certificate (LAC or HAC) holds. The step `t_k` is either fixed
//! at `1/L` or adapted to the residual quantile: `t_k = min{1/L, G·r^p̃(x^k)}`.

mod apd;
mod apg;
mod inner;
mod subproblem;

pub use apd::{apd_solve, apd_solve_observed};
pub use apg::{apg_solve, apg_solve_observed};
pub use inner::{InnerIterate, InnerOutcome, InnerStop};
pub use subproblem::Subproblem;

use crate::error::{check_len, invalid, Result};
use crate::objective::RprProblem;
use crate::trace::{Clock, InnerFailureInfo, RunStatus, RunTrace, SolverRun, TraceRecord};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProxStepRule {
    /// `t_k = 1/L`.
    Fixed,
    /// `t_k = min{1/L, G·r^p̃(x^k)}`.
    Adaptive { gain: f64, quantile: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InnerSolverKind {
    Apg,
    Apd,
}

impl InnerSolverKind {
    pub fn solve(
        self,
        sp: &Subproblem<'_>,
        stop: Option<InnerStop>,
        max_inner: usize,
        observer: &mut dyn FnMut(&InnerIterate<'_>),
    ) -> InnerOutcome {
        match self {
            InnerSolverKind::Apg => apg_solve_observed(sp, stop, max_inner, observer),
            InnerSolverKind::Apd => apd_solve_observed(sp, stop, max_inner, observer),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProxLinConfig {
    pub step_rule: ProxStepRule,
    pub stop: InnerStop,
    pub inner_solver: InnerSolverKind,
    pub max_outer: usize,
    pub max_inner: usize,
    pub target_rel_err: f64,
    /// Seed for the per-subproblem `‖B_k‖₂` power iterations.
    pub seed: u64,
}

/// Steps at or below this are treated as a stationarity certificate.
pub const DEGENERATE_STEP: f64 = 1e-18;

impl ProxLinConfig {
    pub const DEFAULT_MAX_OUTER: usize = 5_000;
    pub const DEFAULT_MAX_INNER: usize = 500_000;

    pub fn new(step_rule: ProxStepRule, stop: InnerStop) -> Self {
        Self {
            step_rule,
            stop,
            inner_solver: InnerSolverKind::Apg,
            max_outer: Self::DEFAULT_MAX_OUTER,
            max_inner: Self::DEFAULT_MAX_INNER,
            target_rel_err: 1e-7,
            seed: 0,
        }
    }

    /// Fixed-step IPL.
    pub fn ipl(stop: InnerStop) -> Self {
        Self::new(ProxStepRule::Fixed, stop)
    }

    /// Quantile-adaptive AdaIPL.
    pub fn ada_ipl(gain: f64, quantile: f64, stop: InnerStop) -> Self {
        Self::new(ProxStepRule::Adaptive { gain, quantile }, stop)
    }

    pub fn with_target(mut self, target_rel_err: f64) -> Self {
        self.target_rel_err = target_rel_err;
        self
    }

    pub fn with_inner_solver(mut self, inner: InnerSolverKind) -> Self {
        self.inner_solver = inner;
        self
    }

    pub fn with_max_outer(mut self, max_outer: usize) -> Self {
        self.max_outer = max_outer;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.stop.validate()?;
        if let ProxStepRule::Adaptive { gain, quantile } = self.step_rule {
            if !(gain > 0.0) {
                return Err(invalid(format!("G must be positive, got {gain}")));
            }
            if !(quantile > 0.0 && quantile < 1.0) {
                return Err(invalid(format!("quantile level must lie in (0, 1), got {quantile}")));
            }
        }
        if self.max_inner == 0 {
            return Err(invalid("max_inner must be at least 1"));
        }
        if !(self.target_rel_err > 0.0) {
            return Err(invalid("target relative error must be positive"));
        }
        Ok(())
    }
}

pub fn prox_linear_run(p: &RprProblem, x0: &[f64], cfg: ProxLinConfig) -> Result<SolverRun> {
    cfg.validate()?;
    check_len(p.n(), x0.len())?;
    let clock = Clock::start();
    let inv_l = 1.0 / p.lipschitz();
    let mut x = x0.to_vec();
    let mut trace = RunTrace::default();
    let mut cum_inner = 0usize;

    for k in 0.. {
        let res = p.residuals(&x)?;
        let f = res.objective();
        let rel = if p.truth().is_some() { p.relative_error(&x)? } else { f64::NAN };
        let t = match cfg.step_rule {
            ProxStepRule::Fixed => inv_l,
            ProxStepRule::Adaptive { gain, quantile } => inv_l.min(gain * res.quantile(quantile)?),
        };
        let mut record = TraceRecord { k, objective: f, rel_err: rel, step: t, inner_iters: 0, cum_inner, wall_ms: 0.0 };

        let stop_now = if !f.is_finite() {
            Some(RunStatus::Diverged)
        } else if t <= DEGENERATE_STEP {
            Some(RunStatus::FixedPoint)
        } else if rel <= cfg.target_rel_err {
            Some(RunStatus::Converged)
        } else if k >= cfg.max_outer {
            Some(RunStatus::MaxIter)
        } else {
            None
        };
        if let Some(status) = stop_now {
            record.wall_ms = clock.ms();
            trace.push(record);
            trace.finish(status);
            break;
        }

        let sp = Subproblem::from_ax(p, &x, res.into_ax(), t, cfg.seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))?;
        let out = cfg.inner_solver.solve(&sp, Some(cfg.stop), cfg.max_inner, &mut |_| {});
        cum_inner += out.iters;
        record.inner_iters = out.iters;
        record.cum_inner = cum_inner;
        record.wall_ms = clock.ms();
        trace.push(record);

        if !out.accepted {
            trace.inner_failure = Some(InnerFailureInfo { k, inner_iters: out.iters, gap: out.gap, threshold: out.threshold });
            trace.finish(RunStatus::InnerFailure);
            break;
        }
        if out.z.iter().all(|v| *v == 0.0) {
            trace.finish(RunStatus::FixedPoint);
            break;
        }
        for (xi, zi) in x.iter_mut().zip(&out.z) {
            *xi += zi;
        }
    }
    Ok(SolverRun { x, trace })
}
