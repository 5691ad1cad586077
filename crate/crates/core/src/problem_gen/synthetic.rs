use crate::error::{invalid, Result};
use crate::objective::RprProblem;
use crate::operators::{DenseMatrix, MeasurementOperator};
use crate::rng::{self, Gaussian, Stream};
use rand::Rng;

/// Gaussian sensing with decaying column variances and a ±1 signal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub m: usize,
    pub p_fail: f64,
    pub seed: u64,
}

/// Column variances `s_i = 1 − 0.75 (i−1)/(n−1)`, all ones when `n = 1`.
pub fn covariance_profile(n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![1.0; n];
    }
    (0..n).map(|i| 1.0 - 0.75 * i as f64 / (n - 1) as f64).collect()
}

/// Rows `a_i ~ N(0, diag(s))`, `x⋆ ∈ {−1, 1}ⁿ` uniform, `b = (Ax⋆)²` with
/// sparse Cauchy-type corruption. `L` is estimated by power iteration.
pub fn gen_synthetic(spec: SyntheticSpec) -> Result<RprProblem> {
    let SyntheticSpec { n, m, p_fail, seed } = spec;
    if n == 0 || m == 0 {
        return Err(invalid("n and m must be positive"));
    }
    super::check_p_fail(m, p_fail)?;

    let scale: Vec<f64> = covariance_profile(n).into_iter().map(f64::sqrt).collect();
    let mut gauss = Gaussian::new(rng::stream(seed, Stream::SensingMatrix));
    let mut data = vec![0.0; m * n];
    for row in data.chunks_exact_mut(n) {
        for (a, s) in row.iter_mut().zip(&scale) {
            *a = s * gauss.sample();
        }
    }
    let op: MeasurementOperator = DenseMatrix::from_row_major(m, n, data)?.into();

    let mut signs = rng::stream(seed, Stream::Signal);
    let truth: Vec<f64> = (0..n).map(|_| if signs.gen::<bool>() { 1.0 } else { -1.0 }).collect();
    let mut b: Vec<f64> = op.apply(&truth)?.into_iter().map(|v| v * v).collect();
    let corrupted = super::corrupt(&mut b, p_fail, seed)?;

    RprProblem::new(op, b)?.with_truth(truth)?.with_corrupted(corrupted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_endpoints() {
        for n in [2, 3, 10, 1500] {
            let s = covariance_profile(n);
            assert_eq!(s[0], 1.0);
            assert_eq!(s[n - 1], 0.25);
        }
        assert_eq!(covariance_profile(1), vec![1.0]);
    }

    #[test]
    fn corrupted_set_size() {
        let p = gen_synthetic(SyntheticSpec { n: 3, m: 10, p_fail: 0.1, seed: 1 }).unwrap();
        assert_eq!(p.corrupted().unwrap().len(), 1);
        let p = gen_synthetic(SyntheticSpec { n: 20, m: 160, p_fail: 0.1, seed: 2 }).unwrap();
        let idx = p.corrupted().unwrap();
        assert_eq!(idx.len(), 16);
        assert!(idx.iter().all(|&i| p.b()[i] > 0.0));
    }

    #[test]
    fn clean_residuals_vanish_at_truth() {
        let p = gen_synthetic(SyntheticSpec { n: 20, m: 160, p_fail: 0.1, seed: 3 }).unwrap();
        let res = p.residuals(p.truth().unwrap()).unwrap();
        let bad = p.corrupted().unwrap();
        for (i, r) in res.signed().iter().enumerate() {
            if bad.binary_search(&i).is_err() {
                assert!(r.abs() <= 1e-20 * (1.0 + p.b()[i]), "{i}: {r}");
            }
        }
        assert!(res.objective() > 0.0);
    }

    #[test]
    fn generation_is_reproducible() {
        let spec = SyntheticSpec { n: 8, m: 40, p_fail: 0.1, seed: 9 };
        let (a, b) = (gen_synthetic(spec).unwrap(), gen_synthetic(spec).unwrap());
        assert_eq!(a.b(), b.b());
        assert_eq!(a.truth(), b.truth());
        assert_eq!(a.lipschitz().to_bits(), b.lipschitz().to_bits());
        let c = gen_synthetic(SyntheticSpec { seed: 10, ..spec }).unwrap();
        assert_ne!(a.b(), c.b());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(gen_synthetic(SyntheticSpec { n: 0, m: 10, p_fail: 0.1, seed: 0 }).is_err());
        assert!(gen_synthetic(SyntheticSpec { n: 2, m: 10, p_fail: 0.6, seed: 0 }).is_err());
    }
}
