mod args;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rpr_core::bench::{run_experiment, selftest, ExperimentConfig, ExperimentReport, Gain, InstanceSpec};
use rpr_core::prox_linear::{InnerSolverKind, InnerStop};
use rpr_core::Execution;

use args::{parse_init, parse_seeds, HyperParams};

/// Robust phase retrieval benchmark runner.
#[derive(Parser, Debug)]
#[command(name = "rpr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gaussian sensing with decaying column variances.
    Synthetic {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long = "m-ratio", default_value_t = 8)]
        m_ratio: usize,
        #[arg(long, default_value_t = 0.1)]
        pfail: f64,
        #[command(flatten)]
        shared: Shared,
    },
    /// Hadamard sensing of a PPM (P6) image.
    Image {
        #[arg(long)]
        ppm: PathBuf,
        #[arg(long, default_value_t = 6)]
        blocks: usize,
        #[arg(long, default_value_t = 0.1)]
        pfail: f64,
        #[command(flatten)]
        shared: Shared,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Inner {
    Apg,
    Apd,
}

#[derive(Args, Debug)]
struct Shared {
    /// Comma-separated: adasubgrad, gsubgrad, psubgrad, ipl-lac, ipl-hac,
    /// adaipl-lac, adaipl-hac.
    #[arg(long, default_value = "adasubgrad,gsubgrad,ipl-lac,ipl-hac,adaipl-lac,adaipl-hac")]
    algos: String,
    /// Gain for the adaptive methods: `0.5`, `100/n`, or `name=value`
    /// (repeatable, comma-separated).
    #[arg(long = "G", value_delimiter = ',')]
    gain: Vec<String>,
    #[arg(long, default_value_t = 0.5)]
    ptilde: f64,
    #[arg(long = "rho-l", default_value_t = InnerStop::DEFAULT_RHO)]
    rho_l: f64,
    #[arg(long = "rho-h", default_value_t = InnerStop::DEFAULT_RHO)]
    rho_h: f64,
    /// GSubGrad decay.
    #[arg(long, default_value_t = 0.983)]
    q: f64,
    /// GSubGrad λ₀ as a multiple of ‖x⁰‖.
    #[arg(long = "lambda0-scale", default_value_t = 0.1)]
    lambda0_scale: f64,
    #[arg(long, default_value_t = ExperimentConfig::DEFAULT_EPS)]
    eps: f64,
    /// `0..10` or `1,2,3`.
    #[arg(long, default_value = "0..10")]
    seeds: String,
    /// `spectral`, `spectral:<quantile>` or `warm:<δ>`.
    #[arg(long, default_value = "spectral")]
    init: String,
    /// Directory for traces.csv and summary.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Inner::Apg)]
    inner: Inner,
    /// Run replications one after another.
    #[arg(long)]
    sequential: bool,
}

impl Shared {
    fn config(&self, instance: InstanceSpec, ipl_gain: Gain) -> Result<ExperimentConfig> {
        let mut hp = HyperParams {
            ptilde: self.ptilde,
            rho_l: self.rho_l,
            rho_h: self.rho_h,
            q: self.q,
            lambda0_scale: self.lambda0_scale,
            inner: match self.inner {
                Inner::Apg => InnerSolverKind::Apg,
                Inner::Apd => InnerSolverKind::Apd,
            },
            subgrad_gain: Gain::Fixed(0.5),
            ipl_gain,
            overrides: Vec::new(),
        };
        for item in &self.gain {
            hp.apply_gain(item)?;
        }
        let algorithms = self.algos.split(',').map(|a| hp.algorithm(a)).collect::<Result<Vec<_>>>()?;
        let mut cfg = ExperimentConfig::new(instance, algorithms, parse_seeds(&self.seeds)?);
        cfg.eps = self.eps;
        cfg.init = parse_init(&self.init)?;
        cfg.out_dir = self.out.clone();
        if self.sequential {
            cfg.execution = Execution::Sequential;
        }
        // surface parameter errors before any instance is generated
        for algo in &cfg.algorithms {
            if let rpr_core::bench::Algorithm::Ipl { stop, .. } | rpr_core::bench::Algorithm::AdaIpl { stop, .. } = algo {
                stop.validate()?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn print_report(report: &ExperimentReport) {
    println!(
        "{:<14} {:>5} {:>8} {:>12} {:>10} {:>12} {:>10}",
        "algo", "runs", "success", "median ms", "IQR ms", "total iters", "main iters"
    );
    for s in &report.summary {
        println!(
            "{:<14} {:>5} {:>8.2} {:>12.2} {:>10.2} {:>12} {:>10}",
            s.algo, s.runs, s.success_rate, s.median_wall_ms, s.iqr_wall_ms, s.median_total_iters, s.median_main_iters
        );
    }
    let setup: Vec<f64> = report.setup_ms.iter().map(|(_, ms)| *ms).collect();
    println!("setup (generation + init) median {:.2} ms, ε = {}", rpr_core::bench::median(&setup), report.eps);
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = match cli.command {
        Command::Selftest => {
            let report = selftest();
            print!("{report}");
            return Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(2) });
        }
        Command::Synthetic { n, m_ratio, pfail, shared } => {
            shared.config(InstanceSpec::Synthetic { n, m_ratio, p_fail: pfail }, Gain::PerDim(100.0))?
        }
        Command::Image { ppm, blocks, pfail, shared } => {
            shared.config(InstanceSpec::Image { path: ppm, blocks, p_fail: pfail }, Gain::PerDim(1000.0))?
        }
    };
    let report = run_experiment(&cfg).context("experiment failed")?;
    print_report(&report);
    if let Some(dir) = &cfg.out_dir {
        println!("wrote {} and {}", dir.join("traces.csv").display(), dir.join("summary.csv").display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
