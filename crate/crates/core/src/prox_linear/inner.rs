//! Shared pieces of the inner solvers: stopping rules, candidate selection and
//! the returned outcome.

use super::subproblem::Subproblem;

/// Practical inexactness conditions, checked on the primal-dual gap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InnerStop {
    /// `H(z) − D(λ) ≤ ρ_l (H(0) − H(z))`.
    Lac { rho: f64 },
    /// `H(z) − D(λ) ≤ (ρ_h/2t)‖z‖²`, with `ρ_h < 1/4`.
    Hac { rho: f64 },
}

impl InnerStop {
    pub const DEFAULT_RHO: f64 = 0.24;

    pub fn validate(&self) -> crate::Result<()> {
        match *self {
            InnerStop::Lac { rho } if !(rho > 0.0 && rho.is_finite()) => {
                Err(crate::error::invalid(format!("ρ_l must be positive, got {rho}")))
            }
            InnerStop::Hac { rho } if !(rho > 0.0 && rho < 0.25) => {
                Err(crate::error::invalid(format!("ρ_h must lie in (0, 1/4), got {rho}")))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            InnerStop::Lac { .. } => "LAC",
            InnerStop::Hac { .. } => "HAC",
        }
    }

    /// Right-hand side of the condition.
    pub fn threshold(&self, t: f64, z_sq: f64, decrease: f64) -> f64 {
        match *self {
            InnerStop::Lac { rho } => rho * decrease,
            InnerStop::Hac { rho } => rho * z_sq / (2.0 * t),
        }
    }
}

/// Snapshot passed to inner-solver observers after every iteration.
#[derive(Clone, Copy, Debug)]
pub struct InnerIterate<'a> {
    pub j: usize,
    pub z: &'a [f64],
    pub lambda: &'a [f64],
    /// `H(z)`.
    pub primal: f64,
    /// `D(λ)`.
    pub dual: f64,
    /// `H(0) − H(z)`.
    pub decrease: f64,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct InnerOutcome {
    pub z: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Iterations performed before the returned pair (0 = the warm start).
    pub iters: usize,
    pub gap: f64,
    /// Whether the stopping rule accepted the returned pair. Always false
    /// when no rule was given.
    pub accepted: bool,
    /// Threshold of the stopping rule at the returned pair, NaN without a rule.
    pub threshold: f64,
}

pub(crate) struct PrimalCandidate<'a> {
    pub z: &'a [f64],
    pub bz: &'a [f64],
}

pub(crate) struct DualCandidate<'a> {
    pub lambda: &'a [f64],
    /// `Bᵀλ`.
    pub u: &'a [f64],
}

/// Tracks the best pair seen and decides acceptance.
pub(crate) struct Selector<'s, 'a> {
    sp: &'s Subproblem<'a>,
    stop: Option<InnerStop>,
    best: Option<InnerOutcome>,
}

impl<'s, 'a> Selector<'s, 'a> {
    pub fn new(sp: &'s Subproblem<'a>, stop: Option<InnerStop>) -> Self {
        Self { sp, stop, best: None }
    }

    /// Scores the candidates of iteration `j`; returns true when the stopping
    /// rule accepts one of them.
    pub fn offer(
        &mut self,
        j: usize,
        primals: &[PrimalCandidate<'_>],
        duals: &[DualCandidate<'_>],
        observer: &mut dyn FnMut(&InnerIterate<'_>),
    ) -> bool {
        let sp = self.sp;
        let (dual, dual_val, u_sq) = duals
            .iter()
            .map(|c| {
                let u_sq = crate::linalg::norm_sq(c.u);
                (c, sp.dual_from(u_sq, c.lambda), u_sq)
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one dual candidate");

        let mut chosen: Option<(usize, f64, f64, f64, f64, bool)> = None;
        for (i, c) in primals.iter().enumerate() {
            let z_sq = crate::linalg::norm_sq(c.z);
            let gap = sp.gap_from(z_sq, c.bz, u_sq, dual.lambda);
            let decrease = sp.decrease_from(z_sq, c.bz);
            let threshold = self.stop.map_or(f64::NAN, |s| s.threshold(sp.t(), z_sq, decrease));
            let ok = self.stop.is_some() && gap <= threshold;
            let better = match chosen {
                None => true,
                Some((_, g, _, _, _, was_ok)) => (ok && !was_ok) || (ok == was_ok && gap < g),
            };
            if better {
                chosen = Some((i, gap, decrease, threshold, z_sq, ok));
            }
        }
        let (i, gap, decrease, threshold, z_sq, ok) = chosen.expect("at least one primal candidate");
        let primal = primals[i].z;
        observer(&InnerIterate {
            j,
            z: primal,
            lambda: dual.lambda,
            primal: sp.h_from(z_sq, primals[i].bz),
            dual: dual_val,
            decrease,
            gap,
        });

        let improves = self.best.as_ref().is_none_or(|b| ok || gap < b.gap);
        if improves {
            self.best = Some(InnerOutcome {
                z: primal.to_vec(),
                lambda: dual.lambda.to_vec(),
                iters: j,
                gap,
                accepted: ok,
                threshold,
            });
        }
        ok
    }

    pub fn finish(self) -> InnerOutcome {
        self.best.expect("selector saw at least one iterate")
    }
}

/// Stepsize safety margin on the power-iteration estimate of `‖B‖₂`.
pub(crate) const NORM_SAFETY: f64 = 1.01;

pub(crate) fn clip_unit(v: f64) -> f64 {
    v.clamp(-1.0, 1.0)
}
