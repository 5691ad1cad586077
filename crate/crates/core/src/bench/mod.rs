//! Replication harness: generates instances per seed, runs every configured
//! algorithm from the same starting point, and summarizes success rates,
//! timings and iteration counts. Traces can be written to and reloaded from
//! CSV.

mod csv_io;
mod selftest;
mod summary;

pub use csv_io::{read_traces_csv, rows_from_results, write_summary_csv, write_traces_csv, TraceRow};
pub use selftest::{selftest, CheckResult, SelfTestReport};
pub use summary::{iqr, median, summarize, summarize_rows, AlgoSummary};

use std::path::PathBuf;
use std::time::Instant;

use crate::error::{invalid, Result, RprError};
use crate::exec::Execution;
use crate::linalg::norm;
use crate::objective::RprProblem;
use crate::problem_gen::{
    gen_synthetic, hadamard_problem_from_image, spectral_init, warm_start, PpmImage, SyntheticSpec,
    DEFAULT_SELECTION_QUANTILE,
};
use crate::prox_linear::{prox_linear_run, InnerSolverKind, InnerStop, ProxLinConfig};
use crate::subgrad::{self, SubgradConfig};
use crate::trace::{RunTrace, SolverRun};

/// Step gain, either absolute or divided by the signal dimension (`100/n`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gain {
    Fixed(f64),
    PerDim(f64),
}

impl Gain {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            Gain::Fixed(g) => g,
            Gain::PerDim(c) => c / n as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Algorithm {
    AdaSubGrad { gain: Gain, quantile: f64 },
    /// `λ₀ = lambda0_scale·‖x⁰‖`.
    GSubGrad { decay: f64, lambda0_scale: f64 },
    /// Polyak steps with `f⋆ = F(x⋆)`; needs ground truth.
    PSubGrad,
    Ipl { stop: InnerStop, inner: InnerSolverKind },
    AdaIpl { gain: Gain, quantile: f64, stop: InnerStop, inner: InnerSolverKind },
}

impl Algorithm {
    pub fn label(&self) -> String {
        let suffix = |inner: &InnerSolverKind| match inner {
            InnerSolverKind::Apg => "",
            InnerSolverKind::Apd => "/APD",
        };
        match self {
            Algorithm::AdaSubGrad { .. } => "AdaSubGrad".into(),
            Algorithm::GSubGrad { .. } => "GSubGrad".into(),
            Algorithm::PSubGrad => "PSubGrad".into(),
            Algorithm::Ipl { stop, inner } => format!("IPL-{}{}", stop.label(), suffix(inner)),
            Algorithm::AdaIpl { stop, inner, .. } => format!("AdaIPL-{}{}", stop.label(), suffix(inner)),
        }
    }

    /// Prox-linear methods count inner iterations as their total work.
    pub fn counts_inner(&self) -> bool {
        matches!(self, Algorithm::Ipl { .. } | Algorithm::AdaIpl { .. })
    }

    pub fn run(&self, p: &RprProblem, x0: &[f64], eps: f64) -> Result<SolverRun> {
        let n = p.n();
        match *self {
            Algorithm::AdaSubGrad { gain, quantile } => {
                subgrad::run(p, x0, SubgradConfig::adaptive(gain.resolve(n), quantile).with_target(eps))
            }
            Algorithm::GSubGrad { decay, lambda0_scale } => {
                let lambda0 = lambda0_scale * norm(x0);
                if !(lambda0 > 0.0) {
                    return Err(invalid("GSubGrad needs a nonzero starting point"));
                }
                subgrad::run(p, x0, SubgradConfig::geometric(Some(lambda0), decay).with_target(eps))
            }
            Algorithm::PSubGrad => {
                let truth = p.truth().ok_or(RprError::MissingTruth)?;
                let f_star = p.objective_value(truth)?;
                subgrad::run(p, x0, SubgradConfig::polyak(f_star).with_target(eps))
            }
            Algorithm::Ipl { stop, inner } => {
                prox_linear_run(p, x0, ProxLinConfig::ipl(stop).with_inner_solver(inner).with_target(eps))
            }
            Algorithm::AdaIpl { gain, quantile, stop, inner } => prox_linear_run(
                p,
                x0,
                ProxLinConfig::ada_ipl(gain.resolve(n), quantile, stop).with_inner_solver(inner).with_target(eps),
            ),
        }
    }
}

/// True for labels produced by prox-linear [`Algorithm`]s.
pub fn label_counts_inner(label: &str) -> bool {
    label.starts_with("IPL-") || label.starts_with("AdaIPL-")
}

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceSpec {
    /// Gaussian sensing with `m = m_ratio·n`.
    Synthetic { n: usize, m_ratio: usize, p_fail: f64 },
    /// Hadamard sensing of a PPM image with `blocks` sign patterns.
    Image { path: PathBuf, blocks: usize, p_fail: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitSpec {
    Spectral { select: f64 },
    Warm { rel_delta: f64 },
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Spectral { select: DEFAULT_SELECTION_QUANTILE }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub algorithms: Vec<Algorithm>,
    pub eps: f64,
    pub seeds: Vec<u64>,
    pub init: InitSpec,
    pub out_dir: Option<PathBuf>,
    /// Policy for running replications concurrently.
    pub execution: Execution,
}

impl ExperimentConfig {
    pub const DEFAULT_EPS: f64 = 1e-7;

    pub fn new(instance: InstanceSpec, algorithms: Vec<Algorithm>, seeds: Vec<u64>) -> Self {
        Self {
            instance,
            algorithms,
            eps: Self::DEFAULT_EPS,
            seeds,
            init: InitSpec::default(),
            out_dir: None,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(invalid("at least one seed is required"));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("seeds must be distinct"));
        }
        if !(self.eps > 0.0) {
            return Err(invalid(format!("ε must be positive, got {}", self.eps)));
        }
        if self.algorithms.is_empty() {
            return Err(invalid("at least one algorithm is required"));
        }
        let mut labels: Vec<String> = self.algorithms.iter().map(Algorithm::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("each algorithm may appear only once"));
        }
        match &self.instance {
            InstanceSpec::Synthetic { n, m_ratio, .. } if *n == 0 || *m_ratio == 0 => {
                return Err(invalid("n and m/n must be positive"));
            }
            InstanceSpec::Image { blocks: 0, .. } => return Err(invalid("at least one block is required")),
            _ => {}
        }
        match self.init {
            InitSpec::Spectral { select } if !(select > 0.0 && select < 1.0) => {
                Err(invalid(format!("selection quantile must lie in (0, 1), got {select}")))
            }
            InitSpec::Warm { rel_delta } if !(rel_delta >= 0.0 && rel_delta.is_finite()) => {
                Err(invalid(format!("warm-start distance must be non-negative, got {rel_delta}")))
            }
            _ => Ok(()),
        }
    }
}

/// One (seed, algorithm) replication.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub seed: u64,
    pub algo: String,
    pub counts_inner: bool,
    pub trace: RunTrace,
}

impl RunResult {
    pub fn success(&self, eps: f64) -> bool {
        self.trace.final_rel_err() <= eps
    }

    /// Inner iterations for prox-linear runs, outer iterations otherwise.
    pub fn total_iterations(&self) -> usize {
        match self.trace.last() {
            Some(r) if self.counts_inner => r.cum_inner,
            Some(r) => r.k,
            None => 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub eps: f64,
    /// Sorted by seed, then by position in the algorithm list.
    pub runs: Vec<RunResult>,
    pub summary: Vec<AlgoSummary>,
    /// Instance generation plus initialization time per seed, in ms.
    pub setup_ms: Vec<(u64, f64)>,
}

struct Instance {
    seed: u64,
    problem: RprProblem,
    x0: Vec<f64>,
    setup_ms: f64,
}

/// Runs every (seed, algorithm) pair. Seeds are processed in increasing
/// order; replications may run concurrently under
/// [`ExperimentConfig::execution`], in which case each run uses sequential
/// kernels.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();

    let image = match &cfg.instance {
        InstanceSpec::Image { path, .. } => Some(PpmImage::read(path)?),
        InstanceSpec::Synthetic { .. } => None,
    };
    let jobs = seeds.len() * cfg.algorithms.len();
    let kernel_exec = if jobs > 1 { Execution::Sequential } else { cfg.execution };

    let instances: Vec<Instance> = cfg
        .execution
        .map_collect(seeds.len(), |i| build_instance(cfg, image.as_ref(), seeds[i], kernel_exec))
        .into_iter()
        .collect::<Result<_>>()?;

    let algos = &cfg.algorithms;
    let runs: Vec<RunResult> = cfg
        .execution
        .map_collect(jobs, |j| {
            let inst = &instances[j / algos.len()];
            let algo = &algos[j % algos.len()];
            algo.run(&inst.problem, &inst.x0, cfg.eps).map(|run| RunResult {
                seed: inst.seed,
                algo: algo.label(),
                counts_inner: algo.counts_inner(),
                trace: run.trace,
            })
        })
        .into_iter()
        .collect::<Result<_>>()?;

    let summary = summarize(&runs, cfg.eps);
    let report = ExperimentReport {
        eps: cfg.eps,
        runs,
        summary,
        setup_ms: instances.iter().map(|i| (i.seed, i.setup_ms)).collect(),
    };
    if let Some(dir) = &cfg.out_dir {
        std::fs::create_dir_all(dir)?;
        write_traces_csv(&rows_from_results(&report.runs), &dir.join("traces.csv"))?;
        write_summary_csv(&report.summary, &dir.join("summary.csv"))?;
    }
    Ok(report)
}

fn build_instance(cfg: &ExperimentConfig, image: Option<&PpmImage>, seed: u64, exec: Execution) -> Result<Instance> {
    let start = Instant::now();
    let problem = match (&cfg.instance, image) {
        (InstanceSpec::Synthetic { n, m_ratio, p_fail }, _) => {
            gen_synthetic(SyntheticSpec { n: *n, m: n * m_ratio, p_fail: *p_fail, seed })?
        }
        (InstanceSpec::Image { blocks, p_fail, .. }, Some(img)) => {
            hadamard_problem_from_image(img, *blocks, *p_fail, seed)?
        }
        (InstanceSpec::Image { .. }, None) => unreachable!("image loaded before instance generation"),
    }
    .with_execution(exec);
    let x0 = match cfg.init {
        InitSpec::Spectral { select } => spectral_init(&problem, select, 1e-8, seed)?,
        InitSpec::Warm { rel_delta } => warm_start(&problem, rel_delta, seed)?,
    };
    Ok(Instance { seed, problem, x0, setup_ms: start.elapsed().as_secs_f64() * 1e3 })
}
