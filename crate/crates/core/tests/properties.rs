use proptest::prelude::*;
use rpr_core::bench::{read_traces_csv, rows_from_results, write_traces_csv};
use rpr_core::problem_gen::{gen_synthetic, SyntheticSpec};
use rpr_core::rng::{self, Gaussian, Stream};
use rpr_core::subgrad::{self, SubgradConfig};
use rpr_core::{fwht_normalized, DenseMatrix, HadamardEnsemble, MeasurementOperator, RprProblem};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gaussian(seed: u64, len: usize) -> Vec<f64> {
    Gaussian::new(rng::stream(seed, Stream::Probe)).vec(len)
}

fn dense(m: usize, n: usize, seed: u64) -> MeasurementOperator {
    DenseMatrix::from_row_major(m, n, gaussian(seed, m * n)).unwrap().into()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dense_adjoint(m in 1usize..40, n in 1usize..20, seed in any::<u64>()) {
        let op = dense(m, n, seed);
        let x = gaussian(seed ^ 1, n);
        let y = gaussian(seed ^ 2, m);
        let lhs = dot(&op.apply(&x).unwrap(), &y);
        let rhs = dot(&x, &op.apply_transpose(&y).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn hadamard_matches_dense(log_n in 0u32..7, blocks in 1usize..5, seed in any::<u64>()) {
        let n = 1usize << log_n;
        let h = HadamardEnsemble::random(n, blocks, seed).unwrap();
        let slow: MeasurementOperator = h.to_dense().into();
        let fast: MeasurementOperator = h.into();
        let x = gaussian(seed, n);
        let y = gaussian(seed ^ 3, n * blocks);
        for (a, b) in fast.apply(&x).unwrap().iter().zip(slow.apply(&x).unwrap()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        for (a, b) in fast.apply_transpose(&y).unwrap().iter().zip(slow.apply_transpose(&y).unwrap()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        let lhs = dot(&fast.apply(&x).unwrap(), &y);
        let rhs = dot(&x, &fast.apply_transpose(&y).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn fwht_is_an_involution(log_n in 0u32..10, seed in any::<u64>()) {
        let x = gaussian(seed, 1 << log_n);
        let mut y = x.clone();
        fwht_normalized(&mut y).unwrap();
        fwht_normalized(&mut y).unwrap();
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn objective_is_sign_invariant(m in 2usize..30, n in 1usize..10, seed in any::<u64>()) {
        let op = dense(m, n, seed);
        let b: Vec<f64> = gaussian(seed ^ 4, m).iter().map(|v| v * v).collect();
        let p = RprProblem::new(op, b).unwrap();
        let x = gaussian(seed ^ 5, n);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        prop_assert_eq!(p.objective_value(&x).unwrap(), p.objective_value(&neg).unwrap());
        prop_assert_eq!(p.quantile_residual(&x, 0.5).unwrap(), p.quantile_residual(&neg, 0.5).unwrap());
        let g: Vec<f64> = p.subgradient(&x).unwrap();
        let g_neg: Vec<f64> = p.subgradient(&neg).unwrap();
        for (a, b) in g.iter().zip(&g_neg) {
            prop_assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn quantile_residual_is_monotone_in_p(m in 2usize..40, seed in any::<u64>(), p1 in 0.01f64..0.99, p2 in 0.01f64..0.99) {
        let op = dense(m, 3, seed);
        let b: Vec<f64> = gaussian(seed ^ 6, m).iter().map(|v| v * v).collect();
        let p = RprProblem::new(op, b).unwrap();
        let x = gaussian(seed ^ 7, 3);
        let (lo, hi) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        prop_assert!(p.quantile_residual(&x, lo).unwrap() <= p.quantile_residual(&x, hi).unwrap());
    }
}

#[test]
fn weak_convexity_and_subgradient_inequality() {
    let p = gen_synthetic(SyntheticSpec { n: 10, m: 60, p_fail: 0.2, seed: 11 }).unwrap();
    let l = p.lipschitz();
    let mut g = Gaussian::new(rng::stream(11, Stream::Probe));
    for _ in 0..200 {
        let x = g.vec(p.n());
        let y = g.vec(p.n());
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let sq = dot(&diff, &diff);
        let fx = p.objective_value(&x).unwrap();
        let fy = p.objective_value(&y).unwrap();
        assert!(l / 2.0 * sq - (fx - p.linear_model(&x, &y).unwrap()).abs() >= -1e-10);
        let v = p.subgradient(&y).unwrap();
        assert!(fx - fy - dot(&diff, &v) + l / 2.0 * sq >= -1e-10);
    }
}

#[test]
fn adaptive_subgradient_is_sign_equivariant_and_deterministic() {
    let p = gen_synthetic(SyntheticSpec { n: 16, m: 128, p_fail: 0.1, seed: 5 }).unwrap();
    let x0: Vec<f64> = p.truth().unwrap().iter().zip(gaussian(5, 16)).map(|(t, e)| t + 0.05 * e).collect();
    let neg: Vec<f64> = x0.iter().map(|v| -v).collect();
    let cfg = SubgradConfig::adaptive(0.5, 0.5).with_max_iter(40);
    let a = subgrad::run(&p, &x0, cfg).unwrap();
    let b = subgrad::run(&p, &neg, cfg).unwrap();
    let again = subgrad::run(&p, &x0, cfg).unwrap();
    assert_eq!(a.x, again.x);
    for (u, v) in a.x.iter().zip(&b.x) {
        assert_eq!(*u, -*v);
    }
    let errs = |r: &rpr_core::SolverRun| r.trace.records().iter().map(|t| t.rel_err).collect::<Vec<_>>();
    assert_eq!(errs(&a), errs(&b));
}

#[test]
fn trace_csv_round_trip() {
    let p = gen_synthetic(SyntheticSpec { n: 8, m: 64, p_fail: 0.1, seed: 2 }).unwrap();
    let x0 = gaussian(2, 8);
    let run = subgrad::run(&p, &x0, SubgradConfig::adaptive(0.5, 0.5).with_max_iter(25)).unwrap();
    let results = vec![rpr_core::bench::RunResult { seed: 2, algo: "AdaSubGrad".into(), counts_inner: false, trace: run.trace }];
    let rows = rows_from_results(&results);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traces.csv");
    write_traces_csv(&rows, &path).unwrap();
    assert_eq!(read_traces_csv(&path).unwrap(), rows);
}
