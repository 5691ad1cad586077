//! Accelerated projected gradient (FISTA) on the box-constrained dual
//! `min_{‖λ‖_∞ ≤ 1} φ(λ) = (t/2)‖Bᵀλ‖² + λᵀd`.
//!
//! Every quantity that is linear in λ is carried along as a combination of
//! already computed products, so an iteration costs one `Bᵀ` and one `B`.
//! The primal candidates are `z(λ_j)` and the θ-weighted average of
//! `z(y_j)` over the extrapolation points.

use super::inner::{clip_unit, DualCandidate, InnerIterate, InnerOutcome, InnerStop, PrimalCandidate, Selector, NORM_SAFETY};
use super::subproblem::Subproblem;
use crate::linalg::sign;

pub fn apg_solve(sp: &Subproblem<'_>, stop: Option<InnerStop>, max_inner: usize) -> InnerOutcome {
    apg_solve_observed(sp, stop, max_inner, &mut |_| {})
}

pub fn apg_solve_observed(
    sp: &Subproblem<'_>,
    stop: Option<InnerStop>,
    max_inner: usize,
    observer: &mut dyn FnMut(&InnerIterate<'_>),
) -> InnerOutcome {
    let (m, n, t) = (sp.m(), sp.n(), sp.t());
    let d = sp.d();
    let mut scratch = vec![0.0; m];

    // λ₀ = sign(−d)
    let mut lam: Vec<f64> = d.iter().map(|v| sign(-v)).collect();
    let mut u_lam = vec![0.0; n];
    sp.apply_bt(&lam, &mut scratch, &mut u_lam);
    let mut bu_lam = vec![0.0; m];
    sp.apply_b(&u_lam, &mut bu_lam);
    let mut z_lam: Vec<f64> = u_lam.iter().map(|v| -t * v).collect();
    let mut bz_lam: Vec<f64> = bu_lam.iter().map(|v| -t * v).collect();

    let mut sel = Selector::new(sp, stop);
    let start_ok = sel.offer(
        0,
        &[PrimalCandidate { z: &z_lam, bz: &bz_lam }],
        &[DualCandidate { lambda: &lam, u: &u_lam }],
        observer,
    );
    let lipschitz = t * (sp.b_norm() * sp.b_norm()) * NORM_SAFETY;
    if start_ok || lipschitz == 0.0 {
        return sel.finish();
    }

    let (mut y, mut u_y, mut bu_y) = (lam.clone(), u_lam.clone(), bu_lam.clone());
    let mut next = vec![0.0; m];
    let mut u_next = vec![0.0; n];
    let mut bu_next = vec![0.0; m];
    let mut z_avg = vec![0.0; n];
    let mut bz_avg = vec![0.0; m];
    let mut weight = 0.0;
    let mut theta = 1.0f64;

    for j in 1..=max_inner {
        // λ_j = Π(y − ∇φ(y)/L_φ),  ∇φ(y) = t·BBᵀy + d
        for (((l, yi), bi), di) in next.iter_mut().zip(&y).zip(&bu_y).zip(d) {
            *l = clip_unit(yi - (t * bi + di) / lipschitz);
        }
        sp.apply_bt(&next, &mut scratch, &mut u_next);
        sp.apply_b(&u_next, &mut bu_next);

        weight += theta;
        let share = theta / weight;
        for (a, b) in z_avg.iter_mut().zip(&u_y) {
            *a += share * (-t * b - *a);
        }
        for (a, b) in bz_avg.iter_mut().zip(&bu_y) {
            *a += share * (-t * b - *a);
        }

        let theta_next = (1.0 + (1.0 + 4.0 * theta * theta).sqrt()) / 2.0;
        let beta = (theta - 1.0) / theta_next;
        theta = theta_next;
        extrapolate(&mut y, &next, &lam, beta);
        extrapolate(&mut u_y, &u_next, &u_lam, beta);
        extrapolate(&mut bu_y, &bu_next, &bu_lam, beta);
        std::mem::swap(&mut lam, &mut next);
        std::mem::swap(&mut u_lam, &mut u_next);
        std::mem::swap(&mut bu_lam, &mut bu_next);

        for (z, u) in z_lam.iter_mut().zip(&u_lam) {
            *z = -t * u;
        }
        for (z, u) in bz_lam.iter_mut().zip(&bu_lam) {
            *z = -t * u;
        }

        let done = sel.offer(
            j,
            &[PrimalCandidate { z: &z_lam, bz: &bz_lam }, PrimalCandidate { z: &z_avg, bz: &bz_avg }],
            &[DualCandidate { lambda: &lam, u: &u_lam }],
            observer,
        );
        if done {
            break;
        }
    }
    sel.finish()
}

/// `out ← cur + β (cur − prev)`
fn extrapolate(out: &mut [f64], cur: &[f64], prev: &[f64], beta: f64) {
    for ((o, c), p) in out.iter_mut().zip(cur).zip(prev) {
        *o = c + beta * (c - p);
    }
}
