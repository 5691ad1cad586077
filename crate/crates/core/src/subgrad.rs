//! Subgradient methods: quantile-adaptive steps, Polyak steps and
//! geometrically decaying normalized steps.

use crate::error::{check_len, invalid, Result};
use crate::linalg::{norm, norm_sq};
use crate::objective::RprProblem;
use crate::trace::{Clock, RunStatus, RunTrace, SolverRun, TraceRecord, TraceWarning};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    /// `α_k = G·r^p̃(x^k)`, update `x − α_k ξ/‖ξ‖²`.
    Adaptive { gain: f64, quantile: f64 },
    /// `α_k = F(x^k) − f⋆`, update `x − α_k ξ/‖ξ‖²`.
    Polyak { f_star: f64 },
    /// `λ_k = λ₀ q^k`, update `x − λ_k ξ/‖ξ‖`. `λ₀ = 0.1‖x⁰‖` when unset.
    Geometric { lambda0: Option<f64>, decay: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubgradConfig {
    pub rule: StepRule,
    pub max_iter: usize,
    pub target_rel_err: f64,
    /// Iterations without a new best objective before the run is declared
    /// diverged.
    pub stall_guard: usize,
}

impl SubgradConfig {
    pub const DEFAULT_MAX_ITER: usize = 20_000;
    pub const DEFAULT_STALL_GUARD: usize = 2_000;

    pub fn new(rule: StepRule) -> Self {
        Self {
            rule,
            max_iter: Self::DEFAULT_MAX_ITER,
            target_rel_err: 1e-7,
            stall_guard: Self::DEFAULT_STALL_GUARD,
        }
    }

    pub fn adaptive(gain: f64, quantile: f64) -> Self {
        Self::new(StepRule::Adaptive { gain, quantile })
    }

    pub fn polyak(f_star: f64) -> Self {
        Self::new(StepRule::Polyak { f_star })
    }

    pub fn geometric(lambda0: Option<f64>, decay: f64) -> Self {
        Self::new(StepRule::Geometric { lambda0, decay })
    }

    pub fn with_target(mut self, target_rel_err: f64) -> Self {
        self.target_rel_err = target_rel_err;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.rule {
            StepRule::Adaptive { gain, quantile } => {
                if !(gain > 0.0 && gain.is_finite()) {
                    return Err(invalid(format!("G must be positive, got {gain}")));
                }
                if !(quantile > 0.0 && quantile < 1.0) {
                    return Err(invalid(format!("quantile level must lie in (0, 1), got {quantile}")));
                }
            }
            StepRule::Polyak { f_star } => {
                if !f_star.is_finite() {
                    return Err(invalid("f_star must be finite"));
                }
            }
            StepRule::Geometric { lambda0, decay } => {
                if lambda0.is_some_and(|l| !(l > 0.0 && l.is_finite())) {
                    return Err(invalid("λ₀ must be positive"));
                }
                if !(decay > 0.0 && decay < 1.0) {
                    return Err(invalid(format!("decay q must lie in (0, 1), got {decay}")));
                }
            }
        }
        if !(self.target_rel_err > 0.0) {
            return Err(invalid("target relative error must be positive"));
        }
        Ok(())
    }
}

pub fn ada_subgrad_run(p: &RprProblem, x0: &[f64], gain: f64, quantile: f64, cfg: SubgradConfig) -> Result<SolverRun> {
    run(p, x0, SubgradConfig { rule: StepRule::Adaptive { gain, quantile }, ..cfg })
}

pub fn polyak_run(p: &RprProblem, x0: &[f64], f_star: f64, cfg: SubgradConfig) -> Result<SolverRun> {
    run(p, x0, SubgradConfig { rule: StepRule::Polyak { f_star }, ..cfg })
}

pub fn geometric_run(p: &RprProblem, x0: &[f64], lambda0: Option<f64>, decay: f64, cfg: SubgradConfig) -> Result<SolverRun> {
    run(p, x0, SubgradConfig { rule: StepRule::Geometric { lambda0, decay }, ..cfg })
}

/// Runs a subgradient method until the target relative error (when ground
/// truth is known), a zero subgradient, a vanishing step, stall detection or
/// the iteration cap.
pub fn run(p: &RprProblem, x0: &[f64], cfg: SubgradConfig) -> Result<SolverRun> {
    cfg.validate()?;
    check_len(p.n(), x0.len())?;
    let clock = Clock::start();
    let mut x = x0.to_vec();
    let mut trace = RunTrace::default();
    let lambda0 = match cfg.rule {
        StepRule::Geometric { lambda0, .. } => lambda0.unwrap_or(0.1 * norm(x0)),
        _ => 0.0,
    };
    let mut best = f64::INFINITY;
    let mut since_best = 0usize;

    for k in 0.. {
        let res = p.residuals(&x)?;
        let f = res.objective();
        let rel = if p.truth().is_some() { p.relative_error(&x)? } else { f64::NAN };
        let xi = res.subgradient(p.op())?;
        let xi_sq = norm_sq(&xi);
        let step = match cfg.rule {
            StepRule::Adaptive { gain, quantile } => gain * res.quantile(quantile)?,
            StepRule::Polyak { f_star } => {
                let gap = f - f_star;
                if gap < 0.0 {
                    trace.warnings.push(TraceWarning::StepClipped { k, objective: f });
                }
                gap.max(0.0)
            }
            StepRule::Geometric { decay, .. } => lambda0 * decay.powi(k as i32),
        };
        trace.push(TraceRecord { k, objective: f, rel_err: rel, step, inner_iters: 0, cum_inner: 0, wall_ms: clock.ms() });

        if !f.is_finite() || !xi_sq.is_finite() {
            trace.finish(RunStatus::Diverged);
            break;
        }
        if xi_sq == 0.0 {
            trace.finish(RunStatus::FixedPoint);
            break;
        }
        if rel <= cfg.target_rel_err {
            trace.finish(RunStatus::Converged);
            break;
        }
        if step <= 1e-16 * (1.0 + f) {
            trace.finish(RunStatus::FixedPoint);
            break;
        }
        if k >= cfg.max_iter {
            trace.finish(RunStatus::MaxIter);
            break;
        }
        if f < best {
            best = f;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > cfg.stall_guard {
                trace.finish(RunStatus::Diverged);
                break;
            }
        }

        let scale = match cfg.rule {
            StepRule::Geometric { .. } => step / xi_sq.sqrt(),
            _ => step / xi_sq,
        };
        for (xj, g) in x.iter_mut().zip(&xi) {
            *xj -= scale * g;
        }
    }
    Ok(SolverRun { x, trace })
}
