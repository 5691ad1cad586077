//! Accelerated primal-dual iteration on the saddle form
//! `min_z max_{‖λ‖_∞ ≤ 1} ‖z‖²/(2t) + λᵀ(Bz − d)`.
//!
//! Chambolle–Pock with strong-convexity acceleration (modulus `1/t`):
//! dual projected ascent, closed-form primal prox, `τ_{j+1} = θ_j τ_j`,
//! `σ_{j+1} = σ_j/θ_j`, `θ_j = 1/√(1 + 2τ_j/t)`. Starts from `τ₀ = t`,
//! `σ₀ = 1/(t‖B‖²)`. The σ-weighted ergodic averages are offered as extra
//! candidates alongside the last iterates.

use super::inner::{clip_unit, DualCandidate, InnerIterate, InnerOutcome, InnerStop, PrimalCandidate, Selector, NORM_SAFETY};
use super::subproblem::Subproblem;
use crate::linalg::sign;

pub fn apd_solve(sp: &Subproblem<'_>, stop: Option<InnerStop>, max_inner: usize) -> InnerOutcome {
    apd_solve_observed(sp, stop, max_inner, &mut |_| {})
}

pub fn apd_solve_observed(
    sp: &Subproblem<'_>,
    stop: Option<InnerStop>,
    max_inner: usize,
    observer: &mut dyn FnMut(&InnerIterate<'_>),
) -> InnerOutcome {
    let (m, n, t) = (sp.m(), sp.n(), sp.t());
    let d = sp.d();
    let mut scratch = vec![0.0; m];

    let mut lam: Vec<f64> = d.iter().map(|v| sign(-v)).collect();
    let mut u = vec![0.0; n];
    sp.apply_bt(&lam, &mut scratch, &mut u);
    let mut z: Vec<f64> = u.iter().map(|v| -t * v).collect();
    let mut bz = vec![0.0; m];
    sp.apply_b(&z, &mut bz);

    let mut sel = Selector::new(sp, stop);
    let start_ok = sel.offer(
        0,
        &[PrimalCandidate { z: &z, bz: &bz }],
        &[DualCandidate { lambda: &lam, u: &u }],
        observer,
    );
    let norm_b = sp.b_norm() * NORM_SAFETY.sqrt();
    if start_ok || norm_b == 0.0 {
        return sel.finish();
    }

    let mut tau = t;
    let mut sigma = 1.0 / (t * norm_b * norm_b);
    let mut bz_bar = bz.clone();
    let mut z_next = vec![0.0; n];
    let mut bz_next = vec![0.0; m];

    let mut weight_sum = 0.0;
    let mut z_avg = vec![0.0; n];
    let mut bz_avg = vec![0.0; m];
    let mut lam_avg = vec![0.0; m];
    let mut u_avg = vec![0.0; n];

    for j in 1..=max_inner {
        for ((l, b), di) in lam.iter_mut().zip(&bz_bar).zip(d) {
            *l = clip_unit(*l + sigma * (b - di));
        }
        sp.apply_bt(&lam, &mut scratch, &mut u);
        let shrink = 1.0 / (1.0 + tau / t);
        for ((zn, zi), ui) in z_next.iter_mut().zip(&z).zip(&u) {
            *zn = (zi - tau * ui) * shrink;
        }
        sp.apply_b(&z_next, &mut bz_next);

        let weight = sigma;
        weight_sum += weight;
        let mix = weight / weight_sum;
        running_mean(&mut z_avg, &z_next, mix);
        running_mean(&mut bz_avg, &bz_next, mix);
        running_mean(&mut lam_avg, &lam, mix);
        running_mean(&mut u_avg, &u, mix);

        let theta = 1.0 / (1.0 + 2.0 * tau / t).sqrt();
        tau *= theta;
        sigma /= theta;
        for ((bb, bn), bo) in bz_bar.iter_mut().zip(&bz_next).zip(&bz) {
            *bb = bn + theta * (bn - bo);
        }
        std::mem::swap(&mut z, &mut z_next);
        std::mem::swap(&mut bz, &mut bz_next);

        let done = sel.offer(
            j,
            &[PrimalCandidate { z: &z, bz: &bz }, PrimalCandidate { z: &z_avg, bz: &bz_avg }],
            &[DualCandidate { lambda: &lam, u: &u }, DualCandidate { lambda: &lam_avg, u: &u_avg }],
            observer,
        );
        if done {
            break;
        }
    }
    sel.finish()
}

fn running_mean(avg: &mut [f64], x: &[f64], mix: f64) {
    for (a, v) in avg.iter_mut().zip(x) {
        *a += mix * (v - *a);
    }
}
