//! Built-in invariant suite behind the `selftest` command.

use std::fmt;

use rand::Rng;

use crate::linalg::{dot, norm_sq};
use crate::objective::RprProblem;
use crate::operators::{DenseMatrix, HadamardEnsemble, MeasurementOperator};
use crate::prox_linear::{apd_solve, apg_solve, InnerOutcome, InnerStop, Subproblem};
use crate::rng::{self, Gaussian, Stream};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SelfTestReport {
    pub checks: Vec<CheckResult>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for SelfTestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {:<28} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

const SEED: u64 = 20_240_601;

pub fn selftest() -> SelfTestReport {
    let checks = vec![
        adjoint_check("dense adjoint", &random_dense(37, 11, SEED)),
        adjoint_check("hadamard adjoint", &HadamardEnsemble::random(64, 6, SEED).expect("n is a power of two").into()),
        hadamard_dense_check(),
        hadamard_lipschitz_check(),
        weak_convexity_check(),
        worked_subproblem_check(),
        sufficiency_check(),
    ];
    SelfTestReport { checks }
}

fn random_dense(m: usize, n: usize, seed: u64) -> MeasurementOperator {
    let data = Gaussian::new(rng::stream_with_salt(seed, Stream::Probe, 1)).vec(m * n);
    DenseMatrix::from_row_major(m, n, data).expect("shape matches data").into()
}

fn adjoint_check(name: &'static str, op: &MeasurementOperator) -> CheckResult {
    let mut g = Gaussian::new(rng::stream_with_salt(SEED, Stream::Probe, 2));
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let x = g.vec(op.cols());
        let y = g.vec(op.rows());
        let lhs = dot(&op.apply(&x).expect("sized"), &y);
        let rhs = dot(&x, &op.apply_transpose(&y).expect("sized"));
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    CheckResult { name, passed: worst <= 1e-12, detail: format!("max relative mismatch {worst:.2e} over 100 pairs") }
}

fn hadamard_dense_check() -> CheckResult {
    let mut g = Gaussian::new(rng::stream_with_salt(SEED, Stream::Probe, 3));
    let mut worst = 0.0f64;
    for n in [1, 2, 4, 8, 16, 32, 64] {
        let h = HadamardEnsemble::random(n, 3, SEED + n as u64).expect("power of two");
        let dense: MeasurementOperator = h.to_dense().into();
        let fast: MeasurementOperator = h.into();
        let x = g.vec(n);
        let y = g.vec(3 * n);
        for (a, b) in fast.apply(&x).expect("sized").iter().zip(&dense.apply(&x).expect("sized")) {
            worst = worst.max((a - b).abs());
        }
        for (a, b) in fast.apply_transpose(&y).expect("sized").iter().zip(&dense.apply_transpose(&y).expect("sized")) {
            worst = worst.max((a - b).abs());
        }
    }
    CheckResult {
        name: "hadamard dense equivalence",
        passed: worst <= 1e-12,
        detail: format!("max abs error {worst:.2e} for n ≤ 64"),
    }
}

fn hadamard_lipschitz_check() -> CheckResult {
    let op: MeasurementOperator = HadamardEnsemble::random(64, 6, SEED).expect("power of two").into();
    let b = vec![1.0; op.rows()];
    let l = RprProblem::new(op, b).map(|p| p.lipschitz()).unwrap_or(f64::NAN);
    CheckResult { name: "hadamard L = 2", passed: (l - 2.0).abs() <= 1e-5, detail: format!("L = {l:.9}") }
}

fn small_problem(n: usize, m: usize, seed: u64, corrupt: bool) -> RprProblem {
    let op = random_dense(m, n, seed);
    let mut g = Gaussian::new(rng::stream_with_salt(seed, Stream::Probe, 4));
    let truth = g.vec(n);
    let mut b: Vec<f64> = op.apply(&truth).expect("sized").into_iter().map(|v| v * v).collect();
    if corrupt {
        b[0] = 10.0 * (1.0 + g.sample().abs());
    }
    RprProblem::new(op, b).expect("valid data").with_truth(truth).expect("sized")
}

fn weak_convexity_check() -> CheckResult {
    let p = small_problem(8, 40, SEED, true);
    let l = p.lipschitz();
    let mut g = Gaussian::new(rng::stream_with_salt(SEED, Stream::Probe, 5));
    let (mut model_slack, mut subgrad_slack) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..200 {
        let x = g.vec(p.n());
        let y: Vec<f64> = x.iter().map(|v| v + g.sample()).collect();
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let fx = p.objective_value(&x).expect("sized");
        let fy = p.objective_value(&y).expect("sized");
        let lin = p.linear_model(&x, &y).expect("sized");
        model_slack = model_slack.min(l / 2.0 * norm_sq(&diff) - (fx - lin).abs());
        let v = p.subgradient(&y).expect("sized");
        subgrad_slack = subgrad_slack.min(fx - fy - dot(&diff, &v) + l / 2.0 * norm_sq(&diff));
    }
    CheckResult {
        name: "weak convexity",
        passed: model_slack >= -1e-10 && subgrad_slack >= -1e-10,
        detail: format!("min slack {model_slack:.2e} (model), {subgrad_slack:.2e} (subgradient) over 200 pairs"),
    }
}

fn worked_subproblem_check() -> CheckResult {
    let op: MeasurementOperator = DenseMatrix::from_rows(&[vec![1.0], vec![2.0]]).expect("rectangular").into();
    let p = RprProblem::new(op, vec![1.0, 4.0]).expect("valid data");
    let sp = Subproblem::build(&p, &[2.0], 0.1, 0).expect("t within range");
    let mut passed = true;
    let mut detail = Vec::new();
    for (name, out) in [("APG", apg_solve(&sp, None, 10_000)), ("APD", apd_solve(&sp, None, 10_000))] {
        let z = out.z[0];
        let h = sp.eval_h(&out.z).expect("sized");
        passed &= (z + 0.75).abs() <= 1e-5 && (h - 2.8125).abs() <= 1e-5 && out.gap <= 1e-10;
        detail.push(format!("{name} z = {z:.8} H = {h:.8} gap = {:.1e}", out.gap));
    }
    CheckResult { name: "worked subproblem", passed, detail: detail.join("; ") }
}

/// Counts accepted inner iterates whose exact condition, measured against a
/// long oracle run, fails.
fn sufficiency_check() -> CheckResult {
    let mut urng = rng::stream_with_salt(SEED, Stream::Probe, 6);
    let (mut accepted, mut violations) = (0usize, 0usize);
    let mut worst_oracle_gap = 0.0f64;
    for case in 0..20u64 {
        let n = urng.gen_range(1..=5);
        let m = urng.gen_range(n.max(2)..=10);
        let p = small_problem(n, m, SEED + 100 + case, case % 2 == 0);
        let mut g = Gaussian::new(rng::stream_with_salt(SEED + case, Stream::Probe, 7));
        let truth = p.truth().expect("generated with truth");
        let x: Vec<f64> = truth.iter().map(|v| v + 0.5 * g.sample()).collect();
        let t = urng.gen_range(0.05..=1.0) / p.lipschitz();
        let sp = Subproblem::build(&p, &x, t, case).expect("t within range");
        let oracle = best_of(apg_solve(&sp, None, 50_000), apd_solve(&sp, None, 50_000));
        worst_oracle_gap = worst_oracle_gap.max(oracle.gap);
        let d_or = sp.eval_d(&oracle.lambda).expect("sized");
        for stop in [InnerStop::Lac { rho: 0.24 }, InnerStop::Hac { rho: 0.24 }] {
            for out in [apg_solve(&sp, Some(stop), 50_000), apd_solve(&sp, Some(stop), 50_000)] {
                if !out.accepted {
                    continue;
                }
                accepted += 1;
                let h = sp.eval_h(&out.z).expect("sized");
                let exact = stop.threshold(t, norm_sq(&out.z), sp.h_at_zero() - h);
                // H(z) − min H ≤ H(z) − D(λ_or)
                if h - d_or > exact + 1e-12 * (1.0 + h.abs()) {
                    violations += 1;
                }
            }
        }
    }
    CheckResult {
        name: "LAC/HAC sufficiency",
        passed: violations == 0 && accepted > 0 && worst_oracle_gap <= 1e-12,
        detail: format!("{violations} violations over {accepted} accepted iterates, oracle gap ≤ {worst_oracle_gap:.1e}"),
    }
}

fn best_of(a: InnerOutcome, b: InnerOutcome) -> InnerOutcome {
    if a.gap <= b.gap {
        a
    } else {
        b
    }
}
