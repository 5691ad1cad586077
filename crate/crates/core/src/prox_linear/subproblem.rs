use crate::error::{check_len, invalid, Result};
use crate::linalg::{norm_sq, sign};
use crate::objective::RprProblem;
use crate::operators::{power_iteration, MeasurementOperator};

const B_NORM_TOL: f64 = 1e-6;
const B_NORM_MAX_ITER: usize = 500;

/// The convex subproblem at `x^k` after the shift `z = x − x^k`:
///
/// `H(z) = ‖z‖²/(2t) + ‖Bz − d‖₁` with `B = (2/m) diag(Ax^k) A` and
/// `d = (b − |Ax^k|²)/m`, and its dual `D(λ) = −(t/2)‖Bᵀλ‖² − λᵀd` over the
/// box `‖λ‖_∞ ≤ 1`. `B` is applied matrix-free.
#[derive(Clone, Debug)]
pub struct Subproblem<'a> {
    op: &'a MeasurementOperator,
    t: f64,
    x_ref: Vec<f64>,
    ax_ref: Vec<f64>,
    d: Vec<f64>,
    b_norm: f64,
}

impl<'a> Subproblem<'a> {
    pub fn build(p: &'a RprProblem, x_k: &[f64], t: f64, seed: u64) -> Result<Self> {
        check_len(p.n(), x_k.len())?;
        let ax = p.op().apply(x_k)?;
        Self::from_ax(p, x_k, ax, t, seed)
    }

    pub(crate) fn from_ax(p: &'a RprProblem, x_k: &[f64], ax_ref: Vec<f64>, t: f64, seed: u64) -> Result<Self> {
        let inv_l = 1.0 / p.lipschitz();
        if !(t > 0.0 && t <= inv_l * (1.0 + 1e-12)) {
            return Err(invalid(format!("subproblem step {t} outside (0, 1/L = {inv_l}]")));
        }
        let m = p.m() as f64;
        let d = p.b().iter().zip(&ax_ref).map(|(b, a)| (b - a * a) / m).collect();
        let mut sp = Self { op: p.op(), t, x_ref: x_k.to_vec(), ax_ref, d, b_norm: 0.0 };
        sp.b_norm = sp.estimate_b_norm(seed);
        Ok(sp)
    }

    fn estimate_b_norm(&self, seed: u64) -> f64 {
        let mut bz = vec![0.0; self.m()];
        let mut scratch = vec![0.0; self.m()];
        let top = power_iteration(
            self.n(),
            |v, out| {
                self.apply_b(v, &mut bz);
                self.apply_bt(&bz, &mut scratch, out);
            },
            B_NORM_TOL,
            B_NORM_MAX_ITER,
            seed,
        );
        top.max(0.0).sqrt()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn x_ref(&self) -> &[f64] {
        &self.x_ref
    }

    pub fn ax_ref(&self) -> &[f64] {
        &self.ax_ref
    }

    /// Power-iteration estimate of `‖B‖₂`.
    pub fn b_norm(&self) -> f64 {
        self.b_norm
    }

    pub fn m(&self) -> usize {
        self.ax_ref.len()
    }

    pub fn n(&self) -> usize {
        self.x_ref.len()
    }

    /// `out ← Bz`.
    pub(crate) fn apply_b(&self, z: &[f64], out: &mut [f64]) {
        self.op.apply_into(z, out).expect("subproblem sizes fixed");
        let scale = 2.0 / self.m() as f64;
        for (o, a) in out.iter_mut().zip(&self.ax_ref) {
            *o *= scale * a;
        }
    }

    /// `out ← Bᵀλ`, with `scratch` of length m.
    pub(crate) fn apply_bt(&self, lambda: &[f64], scratch: &mut [f64], out: &mut [f64]) {
        let scale = 2.0 / self.m() as f64;
        for ((s, l), a) in scratch.iter_mut().zip(lambda).zip(&self.ax_ref) {
            *s = scale * a * l;
        }
        self.op.apply_transpose_into(scratch, out).expect("subproblem sizes fixed");
    }

    pub fn apply_b_vec(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), z.len())?;
        let mut out = vec![0.0; self.m()];
        self.apply_b(z, &mut out);
        Ok(out)
    }

    pub fn apply_bt_vec(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        check_len(self.m(), lambda.len())?;
        let mut scratch = vec![0.0; self.m()];
        let mut out = vec![0.0; self.n()];
        self.apply_bt(lambda, &mut scratch, &mut out);
        Ok(out)
    }

    pub fn eval_h(&self, z: &[f64]) -> Result<f64> {
        let bz = self.apply_b_vec(z)?;
        Ok(self.h_from(norm_sq(z), &bz))
    }

    pub fn eval_d(&self, lambda: &[f64]) -> Result<f64> {
        check_box(lambda)?;
        let u = self.apply_bt_vec(lambda)?;
        Ok(self.dual_from(norm_sq(&u), lambda))
    }

    /// `H(0) = ‖d‖₁`.
    pub fn h_at_zero(&self) -> f64 {
        self.d.iter().map(|v| v.abs()).sum()
    }

    /// `z(λ) = −t Bᵀλ`.
    pub fn primal_from_dual(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        check_box(lambda)?;
        let mut z = self.apply_bt_vec(lambda)?;
        z.iter_mut().for_each(|v| *v *= -self.t);
        Ok(z)
    }

    /// `λ(z) = sign(Bz − d)`, with `sign(0) = 0`.
    pub fn dual_from_primal(&self, z: &[f64]) -> Result<Vec<f64>> {
        let bz = self.apply_b_vec(z)?;
        Ok(bz.iter().zip(&self.d).map(|(b, d)| sign(b - d)).collect())
    }

    pub(crate) fn h_from(&self, z_sq: f64, bz: &[f64]) -> f64 {
        z_sq / (2.0 * self.t) + bz.iter().zip(&self.d).map(|(b, d)| (b - d).abs()).sum::<f64>()
    }

    pub(crate) fn dual_from(&self, u_sq: f64, lambda: &[f64]) -> f64 {
        -0.5 * self.t * u_sq - lambda.iter().zip(&self.d).map(|(l, d)| l * d).sum::<f64>()
    }

    /// `H(0) − H(z)`, summed termwise so large entries of `d` cancel exactly.
    pub(crate) fn decrease_from(&self, z_sq: f64, bz: &[f64]) -> f64 {
        bz.iter().zip(&self.d).map(|(b, d)| d.abs() - (b - d).abs()).sum::<f64>() - z_sq / (2.0 * self.t)
    }

    /// `H(z) − D(λ)`, summed termwise.
    pub(crate) fn gap_from(&self, z_sq: f64, bz: &[f64], u_sq: f64, lambda: &[f64]) -> f64 {
        z_sq / (2.0 * self.t)
            + 0.5 * self.t * u_sq
            + bz.iter().zip(&self.d).zip(lambda).map(|((b, d), l)| (b - d).abs() + l * d).sum::<f64>()
    }
}

fn check_box(lambda: &[f64]) -> Result<()> {
    match lambda.iter().find(|l| !(l.abs() <= 1.0 + 1e-12)) {
        Some(bad) => Err(invalid(format!("dual variable {bad} outside the unit box"))),
        None => Ok(()),
    }
}
