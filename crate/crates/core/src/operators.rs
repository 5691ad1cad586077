//! Linear measurement operators `A: ℝⁿ → ℝᵐ`.
//!
//! Two kinds are supported: a row-major dense matrix and a stack of
//! sign-randomized Sylvester–Hadamard blocks applied through the fast
//! Walsh–Hadamard transform. Operators are immutable once built and can be
//! shared across threads.

use rand::Rng;

use crate::error::{check_len, Result, RprError};
use crate::exec::Execution;
use crate::linalg::{dot, norm};
use crate::rng::{self, Gaussian, Stream};

/// Row blocks used by the dense adjoint. Fixed so that the reduction order
/// does not depend on the execution policy.
const DENSE_ADJOINT_CHUNKS: usize = 16;

#[derive(Clone, Debug)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len(rows * cols, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(RprError::InvalidParameter("matrix has non-finite entries".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_len(cols, r.len())?;
            data.extend_from_slice(r);
        }
        Self::from_row_major(rows.len(), cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { rows: n, cols: n, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn apply_into(&self, exec: Execution, x: &[f64], out: &mut [f64]) {
        let exec = exec.for_work(self.rows * self.cols);
        let rows_per_chunk = 64;
        exec.for_each_chunk_mut(out, rows_per_chunk, |c, chunk| {
            let first = c * rows_per_chunk;
            for (o, i) in chunk.iter_mut().zip(first..) {
                *o = dot(self.row(i), x);
            }
        });
    }

    fn apply_transpose_into(&self, exec: Execution, y: &[f64], out: &mut [f64]) {
        let exec = exec.for_work(self.rows * self.cols);
        let chunk_rows = self.rows.div_ceil(DENSE_ADJOINT_CHUNKS).max(1);
        let chunks = self.rows.div_ceil(chunk_rows);
        let partials = exec.map_collect(chunks, |c| {
            let mut acc = vec![0.0; self.cols];
            let (start, end) = (c * chunk_rows, ((c + 1) * chunk_rows).min(self.rows));
            for (i, &yi) in (start..end).zip(&y[start..end]) {
                if yi != 0.0 {
                    for (a, r) in acc.iter_mut().zip(self.row(i)) {
                        *a += yi * r;
                    }
                }
            }
            acc
        });
        out.iter_mut().for_each(|o| *o = 0.0);
        for p in &partials {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
    }
}

/// `A = √n [ (H_n S_1)ᵀ … (H_n S_k)ᵀ ]ᵀ` with `H_n` the normalized
/// Sylvester–Hadamard matrix and `S_j` random ±1 diagonals. Only the sign
/// vectors are stored.
#[derive(Clone, Debug)]
pub struct HadamardEnsemble {
    n: usize,
    signs: Vec<Vec<f64>>,
}

impl HadamardEnsemble {
    pub fn new(signs: Vec<Vec<f64>>) -> Result<Self> {
        let n = signs.first().map_or(0, Vec::len);
        if !n.is_power_of_two() {
            return Err(RprError::NotPowerOfTwo(n));
        }
        for s in &signs {
            check_len(n, s.len())?;
            if s.iter().any(|v| *v != 1.0 && *v != -1.0) {
                return Err(RprError::InvalidParameter("sign entries must be ±1".into()));
            }
        }
        Ok(Self { n, signs })
    }

    /// Draws `blocks` sign diagonals uniformly from {−1, +1}ⁿ.
    pub fn random(n: usize, blocks: usize, seed: u64) -> Result<Self> {
        if blocks == 0 {
            return Err(RprError::InvalidParameter("block count must be positive".into()));
        }
        let mut rng = rng::stream(seed, Stream::HadamardSigns);
        let signs = (0..blocks)
            .map(|_| (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect())
            .collect();
        Self::new(signs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> usize {
        self.signs.len()
    }

    pub fn signs(&self) -> &[Vec<f64>] {
        &self.signs
    }

    /// Dense materialization, for testing on small `n`.
    pub fn to_dense(&self) -> DenseMatrix {
        let (n, k) = (self.n, self.blocks());
        let mut data = vec![0.0; k * n * n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = 0.0);
            col[j] = 1.0;
            let mut image = vec![0.0; k * n];
            self.apply_into(Execution::Sequential, &col, &mut image);
            for (i, v) in image.iter().enumerate() {
                data[i * n + j] = *v;
            }
        }
        DenseMatrix { rows: k * n, cols: n, data }
    }

    // √n·H_n is the unnormalized ±1 transform, so no scaling is needed here.
    fn apply_into(&self, exec: Execution, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        let exec = exec.for_work(self.blocks() * n * (n.trailing_zeros() as usize + 1));
        exec.for_each_chunk_mut(out, n, |j, block| {
            for ((o, xi), s) in block.iter_mut().zip(x).zip(&self.signs[j]) {
                *o = xi * s;
            }
            fwht_unnormalized(block);
        });
    }

    fn apply_transpose_into(&self, exec: Execution, y: &[f64], out: &mut [f64]) {
        let n = self.n;
        let exec = exec.for_work(self.blocks() * n * (n.trailing_zeros() as usize + 1));
        let partials = exec.map_collect(self.blocks(), |j| {
            let mut v = y[j * n..(j + 1) * n].to_vec();
            fwht_unnormalized(&mut v);
            for (vi, s) in v.iter_mut().zip(&self.signs[j]) {
                *vi *= s;
            }
            v
        });
        out.iter_mut().for_each(|o| *o = 0.0);
        for p in &partials {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum OperatorKind {
    Dense(DenseMatrix),
    Hadamard(HadamardEnsemble),
}

#[derive(Clone, Debug)]
pub struct MeasurementOperator {
    kind: OperatorKind,
    exec: Execution,
}

impl From<DenseMatrix> for MeasurementOperator {
    fn from(m: DenseMatrix) -> Self {
        Self { kind: OperatorKind::Dense(m), exec: Execution::default() }
    }
}

impl From<HadamardEnsemble> for MeasurementOperator {
    fn from(h: HadamardEnsemble) -> Self {
        Self { kind: OperatorKind::Hadamard(h), exec: Execution::default() }
    }
}

impl MeasurementOperator {
    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    /// Number of measurements `m`.
    pub fn rows(&self) -> usize {
        match &self.kind {
            OperatorKind::Dense(d) => d.rows,
            OperatorKind::Hadamard(h) => h.n * h.blocks(),
        }
    }

    /// Signal dimension `n`.
    pub fn cols(&self) -> usize {
        match &self.kind {
            OperatorKind::Dense(d) => d.cols,
            OperatorKind::Hadamard(h) => h.n,
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rows()];
        self.apply_into(x, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.cols(), x.len())?;
        check_len(self.rows(), out.len())?;
        match &self.kind {
            OperatorKind::Dense(d) => d.apply_into(self.exec, x, out),
            OperatorKind::Hadamard(h) => h.apply_into(self.exec, x, out),
        }
        Ok(())
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.cols()];
        self.apply_transpose_into(y, &mut out)?;
        Ok(out)
    }

    pub fn apply_transpose_into(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.rows(), y.len())?;
        check_len(self.cols(), out.len())?;
        match &self.kind {
            OperatorKind::Dense(d) => d.apply_transpose_into(self.exec, y, out),
            OperatorKind::Hadamard(h) => h.apply_transpose_into(self.exec, y, out),
        }
        Ok(())
    }

    /// Largest singular value by power iteration on `AᵀA`.
    pub fn spectral_norm(&self, tol: f64, max_iter: usize, seed: u64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(RprError::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        let mut ax = vec![0.0; self.rows()];
        let top = power_iteration(
            self.cols(),
            |v, out| {
                self.apply_into(v, &mut ax).expect("sizes fixed");
                self.apply_transpose_into(&ax, out).expect("sizes fixed");
            },
            tol,
            max_iter,
            seed,
        );
        Ok(top.max(0.0).sqrt())
    }
}

/// Default power-iteration settings for `‖A‖₂`.
pub const SPECTRAL_TOL: f64 = 1e-8;
pub const SPECTRAL_MAX_ITER: usize = 1000;

/// Leading eigenvalue of a symmetric positive semidefinite map, stopping when
/// the Rayleigh quotient changes by at most `tol` relative.
pub(crate) fn power_iteration(
    dim: usize,
    mut apply: impl FnMut(&[f64], &mut [f64]),
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> f64 {
    let mut v = Gaussian::new(rng::stream(seed, Stream::PowerIteration)).vec(dim);
    let nv = norm(&v);
    if nv == 0.0 {
        return 0.0;
    }
    v.iter_mut().for_each(|x| *x /= nv);
    let mut w = vec![0.0; dim];
    let mut rayleigh = 0.0;
    for _ in 0..max_iter.max(1) {
        apply(&v, &mut w);
        let next = dot(&v, &w);
        let nw = norm(&w);
        if nw == 0.0 {
            return 0.0;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        let converged = (next - rayleigh).abs() <= tol * next.abs();
        rayleigh = next;
        if converged {
            break;
        }
    }
    rayleigh
}

/// In-place ±1 Walsh–Hadamard butterfly (no scaling).
pub(crate) fn fwht_unnormalized(v: &mut [f64]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// `v ← H_n v` with `H_n` the orthonormal Sylvester–Hadamard matrix.
pub fn fwht_normalized(v: &mut [f64]) -> Result<()> {
    if !v.len().is_power_of_two() {
        return Err(RprError::NotPowerOfTwo(v.len()));
    }
    fwht_unnormalized(v);
    let scale = 1.0 / (v.len() as f64).sqrt();
    v.iter_mut().for_each(|x| *x *= scale);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col2() -> MeasurementOperator {
        DenseMatrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap().into()
    }

    fn h2() -> MeasurementOperator {
        HadamardEnsemble::new(vec![vec![1.0, 1.0]]).unwrap().into()
    }

    #[test]
    fn dense_apply_examples() {
        assert_eq!(col2().apply(&[1.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(col2().apply(&[2.0]).unwrap(), vec![2.0, 4.0]);
        assert_eq!(col2().apply_transpose(&[1.0, 1.0]).unwrap(), vec![3.0]);
        assert_eq!(col2().apply_transpose(&[0.0, 0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn hadamard_apply_examples() {
        let y = h2().apply(&[1.0, 0.0]).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-15 && (y[1] - 1.0).abs() < 1e-15);
        let x = h2().apply_transpose(&[1.0, 1.0]).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15 && x[1].abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        assert!(matches!(col2().apply(&[1.0, 2.0]), Err(RprError::DimensionMismatch { expected: 1, got: 2 })));
        assert!(matches!(col2().apply_transpose(&[1.0]), Err(RprError::DimensionMismatch { .. })));
    }

    #[test]
    fn fwht_examples() {
        let mut a = [1.0, 0.0];
        fwht_normalized(&mut a).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert!((a[0] - r).abs() < 1e-15 && (a[1] - r).abs() < 1e-15);

        let mut b = [1.0, 1.0];
        fwht_normalized(&mut b).unwrap();
        assert!((b[0] - 2f64.sqrt()).abs() < 1e-15 && b[1].abs() < 1e-15);

        let mut c = [1.0, 0.0, 0.0, 0.0];
        fwht_normalized(&mut c).unwrap();
        assert_eq!(c, [0.5; 4]);

        assert!(matches!(fwht_normalized(&mut [1.0, 2.0, 3.0]), Err(RprError::NotPowerOfTwo(3))));
    }

    #[test]
    fn spectral_norm_examples() {
        let s = col2().spectral_norm(SPECTRAL_TOL, SPECTRAL_MAX_ITER, 0).unwrap();
        assert!((s - 5f64.sqrt()).abs() < 1e-6);
        let eye: MeasurementOperator = DenseMatrix::identity(3).into();
        assert!((eye.spectral_norm(SPECTRAL_TOL, SPECTRAL_MAX_ITER, 0).unwrap() - 1.0).abs() < 1e-12);
        let h: MeasurementOperator = HadamardEnsemble::random(4, 6, 11).unwrap().into();
        let s = h.spectral_norm(SPECTRAL_TOL, SPECTRAL_MAX_ITER, 0).unwrap();
        assert!((s - 24f64.sqrt()).abs() < 1e-6, "{s}");
        assert!(col2().spectral_norm(0.0, 10, 0).is_err());
    }

    #[test]
    fn zero_operator_has_zero_norm() {
        let z: MeasurementOperator = DenseMatrix::from_row_major(3, 2, vec![0.0; 6]).unwrap().into();
        assert_eq!(z.spectral_norm(1e-8, 100, 0).unwrap(), 0.0);
    }

    #[test]
    fn hadamard_rejects_bad_sizes() {
        assert!(matches!(HadamardEnsemble::new(vec![vec![1.0; 3]]), Err(RprError::NotPowerOfTwo(3))));
        assert!(HadamardEnsemble::new(vec![vec![1.0, 0.5]]).is_err());
        assert!(HadamardEnsemble::random(8, 0, 1).is_err());
    }

    #[test]
    fn gram_of_hadamard_is_scaled_identity() {
        let h = HadamardEnsemble::random(8, 6, 3).unwrap();
        let d = h.to_dense();
        for i in 0..8 {
            for j in 0..8 {
                let g: f64 = (0..d.rows()).map(|r| d.row(r)[i] * d.row(r)[j]).sum();
                let want = if i == j { 48.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-12);
            }
        }
    }
}
