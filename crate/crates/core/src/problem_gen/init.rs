use crate::error::{invalid, Result, RprError};
use crate::linalg::{conjugate_gradient, dot, lower_median, norm, order_statistic};
use crate::objective::{quantile_rank, RprProblem};
use crate::rng::{self, Gaussian, Stream};

/// Fraction of measurements treated as "small" by [`spectral_init`].
pub const DEFAULT_SELECTION_QUANTILE: f64 = 0.4;

const SPECTRAL_MAX_ITER: usize = 2_000;
const CG_TOL: f64 = 1e-8;
const CG_MAX_ITER: usize = 500;

/// Spectral initializer built from the small measurements.
///
/// Rows whose `b_i` lies below the `select`-quantile carry little energy
/// along `x⋆`. With `Σ̂ = AᵀA/m` and `Y = (1/m) Σ_{b_i > cut} a_i a_iᵀ`, the
/// direction is the top generalized eigenvector of `Y v = μ Σ̂ v`, which is the
/// least-energy direction of the small rows after whitening. It is computed
/// by power iteration on `Σ̂⁻¹Y`, solving with `Σ̂` by conjugate gradients, so
/// only matvecs with `A` are needed. The scale matches medians along that
/// direction, `r̂² = median(b) / median(⟨a_i, v⟩²)`, which recovers `‖x⋆‖`
/// exactly for noiseless data when `v = ±x⋆/‖x⋆‖`. The global sign is
/// arbitrary.
pub fn spectral_init(p: &RprProblem, select: f64, power_tol: f64, seed: u64) -> Result<Vec<f64>> {
    let (m, n) = (p.m(), p.n());
    if m < n {
        return Err(invalid(format!("spectral initialization needs m ≥ n, got m = {m} < n = {n}")));
    }
    if !(select > 0.0 && select < 1.0) {
        return Err(invalid(format!("selection quantile must lie in (0, 1), got {select}")));
    }
    if !(power_tol > 0.0) {
        return Err(invalid(format!("power tolerance must be positive, got {power_tol}")));
    }
    if p.b().iter().all(|v| *v == 0.0) {
        return Err(RprError::AllZeroMeasurements);
    }
    let cut = order_statistic(&mut p.b().to_vec(), quantile_rank(m, select));
    let large: Vec<f64> = p.b().iter().map(|&b| if b > cut { 1.0 } else { 0.0 }).collect();

    let op = p.op();
    let inv_m = 1.0 / m as f64;
    let mut av = vec![0.0; m];
    let mut gram = |v: &[f64], out: &mut [f64]| {
        op.apply_into(v, &mut av).expect("sizes fixed");
        op.apply_transpose_into(&av, out).expect("sizes fixed");
        out.iter_mut().for_each(|o| *o *= inv_m);
    };

    let mut v = Gaussian::new(rng::stream(seed, Stream::PowerIteration)).vec(n);
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut proj = vec![0.0; m];
    let mut yv = vec![0.0; n];
    let mut next = v.clone();
    let mut mu = f64::NAN;
    for _ in 0..SPECTRAL_MAX_ITER {
        op.apply_into(&v, &mut proj)?;
        let total = dot(&proj, &proj);
        let kept: f64 = proj.iter().zip(&large).map(|(a, w)| w * a * a).sum();
        let rayleigh = if total > 0.0 { kept / total } else { 0.0 };
        for (a, w) in proj.iter_mut().zip(&large) {
            *a *= w * inv_m;
        }
        op.apply_transpose_into(&proj, &mut yv)?;
        if norm(&yv) == 0.0 {
            break;
        }
        conjugate_gradient(&mut gram, &yv, &mut next, CG_TOL, CG_MAX_ITER);
        let nn = norm(&next);
        if !(nn > 0.0 && nn.is_finite()) {
            break;
        }
        v.iter_mut().zip(&next).for_each(|(vi, x)| *vi = x / nn);
        // the next solution is close to v/μ
        next.iter_mut().zip(&v).for_each(|(x, vi)| *x = vi / rayleigh.max(f64::MIN_POSITIVE));
        let converged = (rayleigh - mu).abs() <= power_tol * rayleigh.abs();
        mu = rayleigh;
        if converged {
            break;
        }
    }

    let sq: Vec<f64> = op.apply(&v)?.into_iter().map(|a| a * a).collect();
    let denom = lower_median(&sq);
    let med = lower_median(p.b());
    let radius = if denom > 0.0 { (med / denom).sqrt() } else { med.sqrt() };
    Ok(v.into_iter().map(|x| radius * x).collect())
}

/// `x⋆ + δ‖x⋆‖·u` for a seeded random unit vector `u`.
pub fn warm_start(p: &RprProblem, rel_delta: f64, seed: u64) -> Result<Vec<f64>> {
    let truth = p.truth().ok_or(RprError::MissingTruth)?;
    if !(rel_delta >= 0.0 && rel_delta.is_finite()) {
        return Err(invalid(format!("relative distance must be non-negative, got {rel_delta}")));
    }
    let u = rng::unit_vector(rng::stream(seed, Stream::WarmStart), truth.len());
    let radius = rel_delta * norm(truth);
    Ok(truth.iter().zip(&u).map(|(x, d)| x + radius * d).collect())
}
