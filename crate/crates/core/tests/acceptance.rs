//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use rpr_core::bench::{
    run_experiment, selftest, Algorithm, ExperimentConfig, ExperimentReport, Gain, InitSpec, InstanceSpec,
};
use rpr_core::problem_gen::{gen_synthetic, PpmImage, SyntheticSpec};
use rpr_core::prox_linear::{apd_solve, apg_solve, InnerSolverKind, InnerStop, Subproblem};
use rpr_core::rng::{self, Gaussian, Stream};
use rpr_core::{DenseMatrix, MeasurementOperator, RprProblem};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

const RHO: f64 = InnerStop::DEFAULT_RHO;

fn check_worked_subproblem() -> Outcome {
    let start = Instant::now();
    let op: MeasurementOperator = DenseMatrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap().into();
    let p = RprProblem::new(op, vec![1.0, 4.0]).unwrap();
    let sp = Subproblem::build(&p, &[2.0], 0.1, 0).unwrap();
    assert_eq!(sp.d(), [-1.5, -6.0]);
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, out) in [("APG", apg_solve(&sp, None, 10_000)), ("APD", apd_solve(&sp, None, 10_000))] {
        let h = sp.eval_h(&out.z).unwrap();
        ok &= (out.z[0] + 0.75).abs() <= 1e-5 && (h - 2.8125).abs() <= 1e-5 && out.gap <= 1e-10;
        detail.push(format!("{name}: z = {:.9}, H = {h:.9}, gap = {:.1e}", out.z[0], out.gap));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 1.0;
    outcome(ok, format!("{}; {secs:.3} s", detail.join("; ")))
}

fn selftest_check(name: &str) -> Outcome {
    let report = selftest();
    let c = report.checks.iter().find(|c| c.name == name).expect("known check");
    outcome(c.passed, c.detail.clone())
}

fn desk_config(m_ratio: usize) -> ExperimentConfig {
    let lac = InnerStop::Lac { rho: RHO };
    let hac = InnerStop::Hac { rho: RHO };
    let inner = InnerSolverKind::Apg;
    let ada = Gain::PerDim(100.0);
    let mut cfg = ExperimentConfig::new(
        InstanceSpec::Synthetic { n: 200, m_ratio, p_fail: 0.1 },
        vec![
            Algorithm::AdaSubGrad { gain: Gain::Fixed(0.5), quantile: 0.5 },
            Algorithm::AdaIpl { gain: ada, quantile: 0.5, stop: lac, inner },
            Algorithm::AdaIpl { gain: ada, quantile: 0.5, stop: hac, inner },
            Algorithm::Ipl { stop: lac, inner },
            Algorithm::Ipl { stop: hac, inner },
            Algorithm::GSubGrad { decay: 0.983, lambda0_scale: 0.1 },
        ],
        (0..10).collect(),
    );
    cfg.eps = 1e-5;
    cfg.init = InitSpec::Warm { rel_delta: 0.1 };
    cfg
}

fn check_success_rates(reports: &[(usize, ExperimentReport)], secs: f64) -> Outcome {
    let mut ok = secs < 300.0;
    let mut detail = Vec::new();
    for (ratio, report) in reports {
        let rates: Vec<String> = report
            .summary
            .iter()
            .map(|s| {
                ok &= s.success_rate == 1.0;
                format!("{} {:.1}", s.algo, s.success_rate)
            })
            .collect();
        detail.push(format!("m/n={ratio}: {}", rates.join(", ")));
    }
    outcome(ok, format!("{}; {secs:.1} s", detail.join("; ")))
}

fn median_total(report: &ExperimentReport, algo: &str) -> f64 {
    report.summary.iter().find(|s| s.algo == algo).expect("configured").median_total_iters
}

fn check_iteration_ordering(report: &ExperimentReport) -> Outcome {
    let (al, il) = (median_total(report, "AdaIPL-LAC"), median_total(report, "IPL-LAC"));
    let (ah, ih) = (median_total(report, "AdaIPL-HAC"), median_total(report, "IPL-HAC"));
    outcome(
        al <= 0.7 * il && ah <= 0.7 * ih,
        format!("median inner iterations AdaIPL-LAC {al} vs IPL-LAC {il}; AdaIPL-HAC {ah} vs IPL-HAC {ih}"),
    )
}

/// Least-squares slope of `ys` against `0, 1, 2, …`.
fn slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mx = (n - 1.0) / 2.0;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - mx;
        sxy += dx * (y - my);
        sxx += dx * dx;
    }
    sxy / sxx
}

fn check_linear_rate(reports: &[(usize, ExperimentReport)]) -> Outcome {
    let (mut worst_ratio, mut worst_slope) = (0.0f64, f64::NEG_INFINITY);
    let mut runs = 0;
    for (_, report) in reports {
        for run in report.runs.iter().filter(|r| r.algo == "AdaSubGrad") {
            runs += 1;
            let errs: Vec<f64> = run.trace.records().iter().map(|r| r.rel_err).collect();
            let tail = &errs[errs.len().saturating_sub(51)..];
            for w in tail.windows(2) {
                worst_ratio = worst_ratio.max(w[1] / w[0]);
            }
            let logs: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
            worst_slope = worst_slope.max(slope(&logs));
        }
    }
    outcome(
        runs == 20 && worst_ratio < 1.0 && worst_slope < -1e-3,
        format!("{runs} runs: max tail ratio {worst_ratio:.4}, max log-error slope {worst_slope:.4} per iteration"),
    )
}

fn check_quantile_equivalence() -> Outcome {
    let p = gen_synthetic(SyntheticSpec { n: 200, m: 1600, p_fail: 0.1, seed: 6 }).unwrap();
    let truth = p.truth().unwrap().to_vec();
    let f_star = p.objective_value(&truth).unwrap();
    let radius = norm(&truth);
    let mut urng = rng::stream(6, Stream::Probe);
    let mut g = Gaussian::new(rng::stream_with_salt(6, Stream::Probe, 1));
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..500 {
        let dir = g.vec(p.n());
        let scale = radius * urng.gen_range(0.0..=1.0) / norm(&dir);
        let x: Vec<f64> = truth.iter().zip(&dir).map(|(t, d)| t + scale * d).collect();
        assert!(p.distance_to_truth(&x).unwrap() <= radius * (1.0 + 1e-12));
        let gap = p.objective_value(&x).unwrap() - f_star;
        let ratio = p.quantile_residual(&x, 0.5).unwrap() / gap;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    outcome(lo > 0.0 && hi.is_finite(), format!("ratio r/(F − F⋆) over 500 points: min {lo:.4}, max {hi:.4}"))
}

fn check_operators() -> Outcome {
    let eq = selftest_check("hadamard dense equivalence");
    let l = selftest_check("hadamard L = 2");
    outcome(eq.passed && l.passed, format!("{}; {}", eq.detail, l.detail))
}

fn check_objective_analytics() -> Outcome {
    let analytic = selftest_check("weak convexity");
    let p = gen_synthetic(SyntheticSpec { n: 20, m: 160, p_fail: 0.1, seed: 8 }).unwrap();
    let mut g = Gaussian::new(rng::stream(8, Stream::Probe));
    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let x = g.vec(p.n());
        let mut d = g.vec(p.n());
        let nd = norm(&d);
        d.iter_mut().for_each(|v| *v /= nd);
        let shifted = |s: f64| -> Vec<f64> { x.iter().zip(&d).map(|(a, b)| a + s * b).collect() };
        let fd = (p.objective_value(&shifted(h)).unwrap() - p.objective_value(&shifted(-h)).unwrap()) / (2.0 * h);
        let exact = dot(&p.subgradient(&x).unwrap(), &d);
        worst = worst.max((fd - exact).abs());
    }
    outcome(
        analytic.passed && worst <= 1e-4,
        format!("{}; directional derivative max error {worst:.2e} at 50 points", analytic.detail),
    )
}

fn write_test_image(path: &Path) {
    let (w, h) = (32, 32);
    let mut samples = Vec::with_capacity(w * h * 3);
    for y in 0..h {
        for x in 0..w {
            let r = 128.0 + 100.0 * ((x as f64) / 5.0).sin();
            let g = 255.0 * (x + y) as f64 / (w + h) as f64;
            let b = if (x / 8 + y / 8) % 2 == 0 { 220.0 } else { 40.0 };
            samples.extend([r as u8, g as u8, b as u8]);
        }
    }
    PpmImage { width: w, height: h, maxval: 255, samples }.write(path).unwrap();
}

fn check_image_recovery() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pattern.ppm");
    write_test_image(&path);
    let mut cfg = ExperimentConfig::new(
        InstanceSpec::Image { path, blocks: 6, p_fail: 0.1 },
        vec![
            Algorithm::AdaSubGrad { gain: Gain::Fixed(0.5), quantile: 0.5 },
            Algorithm::AdaIpl {
                gain: Gain::PerDim(1000.0),
                quantile: 0.5,
                stop: InnerStop::Lac { rho: RHO },
                inner: InnerSolverKind::Apg,
            },
        ],
        (0..3).collect(),
    );
    cfg.eps = 1e-5;
    cfg.init = InitSpec::Warm { rel_delta: 0.1 };
    let report = run_experiment(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let worst = report.runs.iter().map(|r| r.trace.final_rel_err()).fold(0.0, f64::max);
    let iters: Vec<String> =
        report.summary.iter().map(|s| format!("{} {} iters", s.algo, s.median_total_iters)).collect();
    outcome(
        worst <= 1e-5 && secs < 120.0,
        format!("n = 4096, 3 seeds: worst final rel err {worst:.2e}, {}; {secs:.1} s", iters.join(", ")),
    )
}

fn traces_without_wall(dir: &Path) -> String {
    let text = std::fs::read_to_string(dir.join("traces.csv")).unwrap();
    let wall = text.lines().next().unwrap().split(',').position(|c| c == "wall_ms").unwrap();
    text.lines()
        .map(|l| l.split(',').enumerate().filter(|(i, _)| *i != wall).map(|(_, c)| c).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join("\n")
}

fn check_determinism() -> Outcome {
    let mut cfg = desk_config(4);
    cfg.instance = InstanceSpec::Synthetic { n: 32, m_ratio: 6, p_fail: 0.1 };
    cfg.seeds = vec![0, 1, 2];
    cfg.init = InitSpec::default();
    let mut texts = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        cfg.out_dir = Some(dir.path().to_path_buf());
        run_experiment(&cfg).unwrap();
        texts.push(traces_without_wall(dir.path()));
    }
    let lines = texts[0].lines().count();
    outcome(texts[0] == texts[1] && lines > 1, format!("two runs, {lines} CSV lines each, identical without wall_ms"))
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name: &'static str, o: Outcome| {
        println!("{} {name:<24} {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o));
    };

    report("worked subproblem", check_worked_subproblem());
    report("LAC/HAC sufficiency", selftest_check("LAC/HAC sufficiency"));

    let start = Instant::now();
    let desk: Vec<(usize, ExperimentReport)> =
        [4, 8].into_iter().map(|r| (r, run_experiment(&desk_config(r)).unwrap())).collect();
    let secs = start.elapsed().as_secs_f64();
    report("desk success rates", check_success_rates(&desk, secs));
    report("inner iteration ordering", check_iteration_ordering(&desk[1].1));
    report("AdaSubGrad linear rate", check_linear_rate(&desk));
    report("quantile equivalence", check_quantile_equivalence());
    report("operator correctness", check_operators());
    report("objective analytics", check_objective_analytics());
    report("image recovery", check_image_recovery());
    report("determinism", check_determinism());

    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.passed).map(|(name, _)| *name).collect();
    if failed.is_empty() {
        println!("all {} checks passed", results.len());
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
