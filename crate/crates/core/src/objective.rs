//! The robust phase retrieval objective `F(x) = (1/m) Σ |⟨a_i, x⟩² − b_i|`.

use crate::error::{check_len, invalid, Result, RprError};
use crate::linalg::{dist, norm, order_statistic, sign};
use crate::operators::{MeasurementOperator, SPECTRAL_MAX_ITER, SPECTRAL_TOL};

/// Operator, measurements and weak-convexity constant `L = 2‖A‖₂²/m`,
/// optionally with the ground truth and the corrupted index set.
#[derive(Clone, Debug)]
pub struct RprProblem {
    op: MeasurementOperator,
    b: Vec<f64>,
    lipschitz: f64,
    truth: Option<Vec<f64>>,
    corrupted: Option<Vec<usize>>,
}

impl RprProblem {
    /// Builds a problem and estimates `L` by power iteration.
    pub fn new(op: MeasurementOperator, b: Vec<f64>) -> Result<Self> {
        let sigma = op.spectral_norm(SPECTRAL_TOL, SPECTRAL_MAX_ITER, 0)?;
        let m = op.rows() as f64;
        Self::with_lipschitz(op, b, 2.0 * sigma * sigma / m)
    }

    /// Builds a problem with a known weak-convexity constant.
    pub fn with_lipschitz(op: MeasurementOperator, b: Vec<f64>, lipschitz: f64) -> Result<Self> {
        check_len(op.rows(), b.len())?;
        if let Some(bad) = b.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(invalid(format!("measurements must be finite and non-negative, found {bad}")));
        }
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(invalid(format!("weak-convexity constant must be positive, got {lipschitz}")));
        }
        Ok(Self { op, b, lipschitz, truth: None, corrupted: None })
    }

    pub fn with_truth(mut self, truth: Vec<f64>) -> Result<Self> {
        check_len(self.op.cols(), truth.len())?;
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn with_corrupted(mut self, mut idx: Vec<usize>) -> Result<Self> {
        idx.sort_unstable();
        idx.dedup();
        if idx.last().is_some_and(|&i| i >= self.m()) {
            return Err(invalid("corrupted index out of range"));
        }
        self.corrupted = Some(idx);
        Ok(self)
    }

    /// Replaces the execution policy of the measurement operator.
    pub fn with_execution(mut self, exec: crate::Execution) -> Self {
        self.op = self.op.with_execution(exec);
        self
    }

    pub fn op(&self) -> &MeasurementOperator {
        &self.op
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn truth(&self) -> Option<&[f64]> {
        self.truth.as_deref()
    }

    pub fn corrupted(&self) -> Option<&[usize]> {
        self.corrupted.as_deref()
    }

    pub fn m(&self) -> usize {
        self.op.rows()
    }

    pub fn n(&self) -> usize {
        self.op.cols()
    }

    /// Residual data at `x` from a single forward matvec.
    pub fn residuals(&self, x: &[f64]) -> Result<Residuals> {
        let ax = self.op.apply(x)?;
        Ok(self.residuals_from_ax(ax))
    }

    pub(crate) fn residuals_from_ax(&self, ax: Vec<f64>) -> Residuals {
        let signed = ax.iter().zip(&self.b).map(|(a, b)| a * a - b).collect();
        Residuals { ax, signed }
    }

    pub fn objective_value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.residuals(x)?.objective())
    }

    /// `⌈m·p̃⌉`-th smallest absolute residual at `x`.
    pub fn quantile_residual(&self, x: &[f64], p: f64) -> Result<f64> {
        self.residuals(x)?.quantile(p)
    }

    pub fn subgradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.residuals(x)?.subgradient(&self.op)
    }

    /// `Δ(x) = min{‖x − x⋆‖, ‖x + x⋆‖}`.
    pub fn distance_to_truth(&self, x: &[f64]) -> Result<f64> {
        let truth = self.truth.as_deref().ok_or(RprError::MissingTruth)?;
        check_len(truth.len(), x.len())?;
        let minus = dist(x, truth);
        let plus = x.iter().zip(truth).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
        Ok(minus.min(plus))
    }

    /// `Δ(x)/‖x⋆‖₂`, or `Δ(x)` itself when `x⋆ = 0`.
    pub fn relative_error(&self, x: &[f64]) -> Result<f64> {
        let delta = self.distance_to_truth(x)?;
        let scale = norm(self.truth.as_deref().unwrap_or_default());
        Ok(if scale > 0.0 { delta / scale } else { delta })
    }

    /// Linearized objective `F(z; y) = (1/m)‖|Ay|² − b + 2(Ay)⊙A(z−y)‖₁`.
    pub fn linear_model(&self, z: &[f64], y: &[f64]) -> Result<f64> {
        check_len(self.n(), z.len())?;
        check_len(self.n(), y.len())?;
        let ay = self.op.apply(y)?;
        let step: Vec<f64> = z.iter().zip(y).map(|(a, b)| a - b).collect();
        let a_step = self.op.apply(&step)?;
        let l1: f64 = ay
            .iter()
            .zip(&a_step)
            .zip(&self.b)
            .map(|((ay, ad), b)| (ay * ay - b + 2.0 * ay * ad).abs())
            .sum();
        Ok(l1 / self.m() as f64)
    }

    /// Proximal linear model `F_t(z; y) = F(z; y) + ‖z−y‖²/(2t)`.
    pub fn model_value(&self, z: &[f64], y: &[f64], t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(invalid(format!("model step must be positive, got {t}")));
        }
        let step_sq: f64 = z.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(self.linear_model(z, y)? + step_sq / (2.0 * t))
    }
}

/// Cached `Ax` and signed residuals `(Ax)² − b` at one iterate.
#[derive(Clone, Debug)]
pub struct Residuals {
    ax: Vec<f64>,
    signed: Vec<f64>,
}

impl Residuals {
    pub fn ax(&self) -> &[f64] {
        &self.ax
    }

    pub fn into_ax(self) -> Vec<f64> {
        self.ax
    }

    pub fn signed(&self) -> &[f64] {
        &self.signed
    }

    pub fn absolute(&self) -> Vec<f64> {
        self.signed.iter().map(|r| r.abs()).collect()
    }

    pub fn objective(&self) -> f64 {
        self.signed.iter().map(|r| r.abs()).sum::<f64>() / self.signed.len() as f64
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("quantile level must lie in (0, 1), got {p}")));
        }
        let mut r = self.absolute();
        let k = quantile_rank(r.len(), p);
        Ok(order_statistic(&mut r, k))
    }

    /// `ξ = (2/m) Aᵀ((Ax) ⊙ sign((Ax)² − b))`.
    pub fn subgradient(&self, op: &MeasurementOperator) -> Result<Vec<f64>> {
        let scale = 2.0 / self.ax.len() as f64;
        let weights: Vec<f64> = self.ax.iter().zip(&self.signed).map(|(a, r)| scale * a * sign(*r)).collect();
        op.apply_transpose(&weights)
    }
}

/// 1-based rank `⌈m·p⌉`, clamped to `[1, m]`. The small offset keeps products
/// such as `10 × 0.7` from rounding up past the intended integer.
pub fn quantile_rank(m: usize, p: f64) -> usize {
    let raw = m as f64 * p;
    let k = (raw - 1e-9 * raw.max(1.0)).ceil();
    (k.max(1.0) as usize).min(m.max(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::DenseMatrix;

    fn toy() -> RprProblem {
        let op: MeasurementOperator = DenseMatrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap().into();
        RprProblem::new(op, vec![1.0, 4.0]).unwrap().with_truth(vec![1.0]).unwrap()
    }

    #[test]
    fn lipschitz_of_toy() {
        assert!((toy().lipschitz() - 5.0).abs() < 1e-7);
    }

    #[test]
    fn objective_examples() {
        let p = toy();
        assert_eq!(p.objective_value(&[1.0]).unwrap(), 0.0);
        assert_eq!(p.objective_value(&[0.0]).unwrap(), 2.5);
        assert_eq!(p.objective_value(&[2.0]).unwrap(), 7.5);
        assert!(p.objective_value(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn quantile_examples() {
        let p = toy();
        assert_eq!(p.quantile_residual(&[2.0], 0.5).unwrap(), 3.0);
        assert_eq!(p.quantile_residual(&[1.0], 0.5).unwrap(), 0.0);
        assert!(p.quantile_residual(&[2.0], 1.0).is_err());

        let op: MeasurementOperator = DenseMatrix::identity(4).into();
        // residuals |x_i² − 0| = {3, 1, 4, 2}
        let q = RprProblem::new(op, vec![0.0; 4]).unwrap();
        let x = [3f64.sqrt(), 1.0, 2.0, 2f64.sqrt()];
        assert!((q.quantile_residual(&x, 0.5).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quantile_rank_rounding() {
        assert_eq!(quantile_rank(4, 0.5), 2);
        assert_eq!(quantile_rank(2, 0.5), 1);
        assert_eq!(quantile_rank(10, 0.7), 7);
        assert_eq!(quantile_rank(10, 0.71), 8);
        assert_eq!(quantile_rank(3, 0.01), 1);
        assert_eq!(quantile_rank(800, 0.5), 400);
    }

    #[test]
    fn subgradient_examples() {
        let p = toy();
        assert_eq!(p.subgradient(&[1.0]).unwrap(), vec![0.0]);
        assert_eq!(p.subgradient(&[2.0]).unwrap(), vec![10.0]);
        assert_eq!(p.subgradient(&[-2.0]).unwrap(), vec![-10.0]);
    }

    #[test]
    fn distance_examples() {
        let p = toy();
        assert_eq!(p.distance_to_truth(&[1.0]).unwrap(), 0.0);
        assert_eq!(p.distance_to_truth(&[-1.0]).unwrap(), 0.0);
        assert_eq!(p.distance_to_truth(&[0.0]).unwrap(), 1.0);
        let no_truth = RprProblem::new(toy().op().clone(), vec![1.0, 4.0]).unwrap();
        assert!(matches!(no_truth.distance_to_truth(&[0.0]), Err(RprError::MissingTruth)));
    }

    #[test]
    fn model_examples() {
        let p = toy();
        for t in [0.1, 1.0, 7.0] {
            assert_eq!(p.model_value(&[2.0], &[2.0], t).unwrap(), p.objective_value(&[2.0]).unwrap());
        }
        assert_eq!(p.model_value(&[1.0], &[2.0], 1.0).unwrap(), 3.0);
        assert!(p.model_value(&[1.0], &[2.0], 0.0).is_err());
        // |F(1) − F(1; 2)| ≤ (L/2)·1 with equality here.
        let gap = (p.objective_value(&[1.0]).unwrap() - (p.model_value(&[1.0], &[2.0], 1.0).unwrap() - 0.5)).abs();
        assert!(gap <= p.lipschitz() / 2.0 + 1e-6);
        assert!((gap - 2.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_measurements() {
        let op: MeasurementOperator = DenseMatrix::identity(2).into();
        assert!(RprProblem::new(op, vec![1.0, -1.0]).is_err());
    }
}
