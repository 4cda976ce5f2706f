//! Experiment runner CLI.
//!
//! `superpolyak solve` generates a seeded instance, runs the coupled solver
//! and a first-order baseline, and writes `superpolyak.csv`, `baseline.csv`,
//! `summary.csv`, and `instance.json` into the output directory. Options
//! come from flags or a TOML config file (flags win). Multiple seeds run in
//! parallel worker threads; `SUPERPOLYAK_THREADS` caps the worker count.
//!
//! Exit codes: 0 when every run reached its target gap, 1 on configuration
//! or usage errors, 2 when any run exhausted a budget.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::atomic::{AtomicI32, AtomicUsize, Ordering};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use superpolyak::harness::{run_experiment, BaselineKind, ExperimentConfig, ProblemKind};
use superpolyak::problems::Ensemble;
use superpolyak::solver::SuperConfig;

#[derive(Parser)]
#[command(name = "superpolyak", version, about = "Benchmark harness for sharp nonsmooth solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment (coupled solver vs. baseline) and emit CSV traces.
    Solve(SolveArgs),
}

#[derive(Args, Debug, Default)]
struct SolveArgs {
    /// TOML config file with the same keys as the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem family: matrix_sensing | max_linear | phase_retrieval | compressed_sensing.
    #[arg(long)]
    problem: Option<String>,
    /// Ambient/problem dimension d.
    #[arg(long)]
    d: Option<usize>,
    /// Rank / number of pieces (matrix sensing, max-linear).
    #[arg(long)]
    r: Option<usize>,
    /// Number of measurements.
    #[arg(long)]
    m: Option<usize>,
    /// Sparsity (compressed sensing).
    #[arg(long)]
    s: Option<usize>,
    /// Planted condition number (matrix sensing).
    #[arg(long)]
    kappa: Option<f64>,
    /// l1 penalty (compressed sensing); defaults to 0.1 * ||A^T y||_inf.
    #[arg(long)]
    lambda: Option<f64>,
    /// Use the plain lambda prox threshold instead of tau * lambda.
    #[arg(long)]
    literal_prox: bool,
    /// Measurement ensemble: gaussian | hadamard (matrix sensing).
    #[arg(long)]
    ensemble: Option<String>,
    /// Root seed(s); comma-separated values run as parallel experiments.
    #[arg(long, value_delimiter = ',')]
    seed: Option<Vec<u64>>,
    /// Target function gap for the coupled solver.
    #[arg(long)]
    eps: Option<f64>,
    /// Travel radius growth factor per outer iteration.
    #[arg(long)]
    omega: Option<f64>,
    /// Required per-iteration gap reduction factor.
    #[arg(long)]
    gamma: Option<f64>,
    /// Initial superlinear exponent estimate.
    #[arg(long)]
    eta_est: Option<f64>,
    /// Exponent estimate floor.
    #[arg(long)]
    eta_lb: Option<f64>,
    /// Exponent estimate decay factor.
    #[arg(long)]
    q: Option<f64>,
    /// Cap on the travel radius multiplier.
    #[arg(long)]
    tau_max: Option<f64>,
    /// Outer iteration limit.
    #[arg(long)]
    max_outer: Option<u64>,
    /// Application budget per fallback call.
    #[arg(long)]
    fallback_budget: Option<u64>,
    /// Global oracle-call cap (also the baseline's application budget).
    #[arg(long)]
    max_oracle: Option<u64>,
    /// Baseline method; defaults to the problem's natural first-order method.
    #[arg(long)]
    baseline: Option<String>,
    /// Gap target for the baseline run (defaults to eps).
    #[arg(long)]
    baseline_eps: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// File-config mirror of the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    problem: Option<String>,
    d: Option<usize>,
    r: Option<usize>,
    m: Option<usize>,
    s: Option<usize>,
    kappa: Option<f64>,
    lambda: Option<f64>,
    literal_prox: Option<bool>,
    ensemble: Option<String>,
    seed: Option<u64>,
    eps: Option<f64>,
    omega: Option<f64>,
    gamma: Option<f64>,
    eta_est: Option<f64>,
    eta_lb: Option<f64>,
    q: Option<f64>,
    tau_max: Option<f64>,
    max_outer: Option<u64>,
    fallback_budget: Option<u64>,
    max_oracle: Option<u64>,
    baseline: Option<String>,
    baseline_eps: Option<f64>,
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Usage and parse failures exit 1 with the usage text.
            eprint!("{err}");
            return ExitCode::from(1);
        }
    };
    match cli.command {
        Command::Solve(args) => match solve(args) {
            Ok(code) => ExitCode::from(code),
            Err(msg) => {
                eprintln!("error: {msg}");
                eprintln!("run `superpolyak solve --help` for usage");
                ExitCode::from(1)
            }
        },
    }
}

fn solve(args: SolveArgs) -> Result<u8, String> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            toml::from_str(&text).map_err(|e| format!("bad config file: {e}"))?
        }
        None => FileConfig::default(),
    };

    let problem_name = args
        .problem
        .or(file.problem)
        .ok_or("missing required flag --problem")?;
    let problem = ProblemKind::parse(&problem_name).map_err(|e| e.to_string())?;
    let d = args.d.or(file.d).ok_or("missing required flag --d")?;
    let seeds = args
        .seed
        .or(file.seed.map(|s| vec![s]))
        .ok_or("missing required flag --seed")?;
    let out = args.out.or(file.out).ok_or("missing required flag --out")?;

    let mut solver = SuperConfig::default();
    if let Some(v) = args.eps.or(file.eps) {
        solver.eps = v;
    }
    if let Some(v) = args.omega.or(file.omega) {
        solver.omega = v;
    }
    if let Some(v) = args.gamma.or(file.gamma) {
        solver.gamma = v;
    }
    if let Some(v) = args.eta_est.or(file.eta_est) {
        solver.eta_est0 = v;
    }
    if let Some(v) = args.eta_lb.or(file.eta_lb) {
        solver.eta_lb = v;
    }
    if let Some(v) = args.q.or(file.q) {
        solver.q = v;
    }
    if let Some(v) = args.tau_max.or(file.tau_max) {
        solver.tau_max = v;
    }
    if let Some(v) = args.max_outer.or(file.max_outer) {
        solver.max_outer = v;
    }
    if let Some(v) = args.fallback_budget.or(file.fallback_budget) {
        solver.fallback_budget = v;
    }
    if let Some(v) = args.max_oracle.or(file.max_oracle) {
        solver.max_oracle = Some(v);
    }

    let baseline = match args.baseline.or(file.baseline) {
        Some(name) => BaselineKind::parse(&name).map_err(|e| e.to_string())?,
        None => BaselineKind::default_for(problem),
    };
    let ensemble = match args.ensemble.or(file.ensemble) {
        Some(name) => Ensemble::from_str(&name).map_err(|e| e.to_string())?,
        None => Ensemble::Gaussian,
    };

    let mut base_cfg = ExperimentConfig::new(problem, d, seeds[0], out.clone());
    base_cfg.r = args.r.or(file.r).unwrap_or(1);
    base_cfg.m = args.m.or(file.m).unwrap_or(0);
    base_cfg.s = args.s.or(file.s).unwrap_or(0);
    base_cfg.kappa_tilde = args.kappa.or(file.kappa).unwrap_or(1.0);
    base_cfg.lambda = args.lambda.or(file.lambda);
    base_cfg.literal_prox = args.literal_prox || file.literal_prox.unwrap_or(false);
    base_cfg.ensemble = ensemble;
    base_cfg.solver = solver;
    base_cfg.baseline = baseline;
    base_cfg.baseline_eps = args.baseline_eps.or(file.baseline_eps).unwrap_or(solver.eps);
    base_cfg.validate().map_err(|e| e.to_string())?;

    if seeds.len() == 1 {
        let code = run_experiment(&base_cfg).map_err(|e| e.to_string())?;
        report_run(&base_cfg);
        return Ok(code as u8);
    }

    // Multiple seeds: one subdirectory per seed, worker threads capped by
    // SUPERPOLYAK_THREADS.
    let workers = worker_count(seeds.len());
    let next = AtomicUsize::new(0);
    let worst = AtomicI32::new(0);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= seeds.len() {
                    break;
                }
                let mut cfg = base_cfg.clone();
                cfg.seed = seeds[idx];
                cfg.output_dir = out.join(format!("seed_{}", seeds[idx]));
                match run_experiment(&cfg) {
                    Ok(code) => {
                        report_run(&cfg);
                        worst.fetch_max(code, Ordering::Relaxed);
                    }
                    Err(err) => {
                        eprintln!("seed {}: error: {err}", seeds[idx]);
                        worst.fetch_max(1, Ordering::Relaxed);
                    }
                }
            });
        }
    });
    Ok(worst.load(Ordering::Relaxed) as u8)
}

fn report_run(cfg: &ExperimentConfig) {
    println!(
        "{} seed {} -> {}",
        cfg.problem.as_str(),
        cfg.seed,
        cfg.output_dir.display()
    );
}

fn worker_count(jobs: usize) -> usize {
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let cap = std::env::var("SUPERPOLYAK_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(available);
    jobs.min(cap).max(1)
}
