//! Experiment harness: generate a seeded instance, run the coupled solver
//! against a first-order baseline, and emit CSV trajectories plus a summary
//! table.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{Result, SolverError};
use crate::fallbacks::{fallback_run, polyak_map, AlgorithmicMapping};
use crate::oracle::{gap, record, Oracle, OracleCounter, RunHistory, StepKind};
use crate::polyak_sgm::RunStatus;
use crate::problems::{
    gen_compressed_sensing_with, gen_matrix_sensing, gen_max_linear, gen_phase_retrieval,
    init_rng, Ensemble, ProblemSpec,
};
use crate::solver::{run_superpolyak, SuperConfig};

/// Benchmark problem family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    MatrixSensing,
    MaxLinear,
    PhaseRetrieval,
    CompressedSensing,
}

impl ProblemKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "matrix_sensing" => Ok(ProblemKind::MatrixSensing),
            "max_linear" => Ok(ProblemKind::MaxLinear),
            "phase_retrieval" => Ok(ProblemKind::PhaseRetrieval),
            "compressed_sensing" => Ok(ProblemKind::CompressedSensing),
            other => Err(SolverError::InvalidConfig(format!(
                "unknown problem '{other}'"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ProblemKind::MatrixSensing => "matrix_sensing",
            ProblemKind::MaxLinear => "max_linear",
            ProblemKind::PhaseRetrieval => "phase_retrieval",
            ProblemKind::CompressedSensing => "compressed_sensing",
        }
    }
}

/// First-order baseline (also the coupled solver's fallback mapping).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    PolyakSgm,
    AlternatingProjections,
    FixedPoint,
    ProxGradient,
}

impl BaselineKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "polyak_sgm" => Ok(BaselineKind::PolyakSgm),
            "alternating_projections" => Ok(BaselineKind::AlternatingProjections),
            "fixed_point" => Ok(BaselineKind::FixedPoint),
            "prox_gradient" => Ok(BaselineKind::ProxGradient),
            other => Err(SolverError::InvalidConfig(format!(
                "unknown baseline '{other}'"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BaselineKind::PolyakSgm => "polyak_sgm",
            BaselineKind::AlternatingProjections => "alternating_projections",
            BaselineKind::FixedPoint => "fixed_point",
            BaselineKind::ProxGradient => "prox_gradient",
        }
    }

    /// The natural baseline for each problem family.
    pub fn default_for(problem: ProblemKind) -> Self {
        match problem {
            ProblemKind::MatrixSensing | ProblemKind::MaxLinear => BaselineKind::PolyakSgm,
            ProblemKind::PhaseRetrieval => BaselineKind::AlternatingProjections,
            ProblemKind::CompressedSensing => BaselineKind::ProxGradient,
        }
    }
}

/// Full experiment configuration.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    pub d: usize,
    pub r: usize,
    pub m: usize,
    pub s: usize,
    pub kappa_tilde: f64,
    pub lambda: Option<f64>,
    pub literal_prox: bool,
    pub ensemble: Ensemble,
    pub seed: u64,
    pub solver: SuperConfig,
    /// Gap target for the baseline run (defaults to the solver's eps).
    pub baseline_eps: f64,
    pub baseline: BaselineKind,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(problem: ProblemKind, d: usize, seed: u64, output_dir: PathBuf) -> Self {
        let solver = SuperConfig::default();
        ExperimentConfig {
            problem,
            d,
            r: 1,
            m: 0,
            s: 0,
            kappa_tilde: 1.0,
            lambda: None,
            literal_prox: false,
            ensemble: Ensemble::Gaussian,
            seed,
            solver,
            baseline_eps: solver.eps,
            baseline: BaselineKind::default_for(problem),
            output_dir,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.d == 0 {
            return Err(SolverError::InvalidConfig("d must be positive".into()));
        }
        match self.problem {
            ProblemKind::MatrixSensing | ProblemKind::MaxLinear => {
                if self.r == 0 || self.m == 0 {
                    return Err(SolverError::InvalidConfig(
                        "matrix sensing and max-linear require --r and --m".into(),
                    ));
                }
            }
            ProblemKind::PhaseRetrieval => {
                if self.m == 0 {
                    return Err(SolverError::InvalidConfig(
                        "phase retrieval requires --m".into(),
                    ));
                }
            }
            ProblemKind::CompressedSensing => {
                if self.m == 0 || self.s == 0 {
                    return Err(SolverError::InvalidConfig(
                        "compressed sensing requires --m and --s".into(),
                    ));
                }
            }
        }
        let valid_baseline = match self.problem {
            ProblemKind::MatrixSensing | ProblemKind::MaxLinear => {
                self.baseline == BaselineKind::PolyakSgm
            }
            ProblemKind::PhaseRetrieval => matches!(
                self.baseline,
                BaselineKind::AlternatingProjections | BaselineKind::PolyakSgm
            ),
            ProblemKind::CompressedSensing => matches!(
                self.baseline,
                BaselineKind::FixedPoint | BaselineKind::ProxGradient | BaselineKind::PolyakSgm
            ),
        };
        if !valid_baseline {
            return Err(SolverError::InvalidConfig(format!(
                "baseline {} is not available for problem {}",
                self.baseline.as_str(),
                self.problem.as_str()
            )));
        }
        Ok(())
    }
}

/// A generated problem, ready to run: oracle, start point, the fallback
/// mapping used both inside the coupled solver and as the baseline, and the
/// serialized instance spec.
pub struct GeneratedProblem {
    pub oracle: Oracle,
    pub x0: Vec<f64>,
    pub fallback: AlgorithmicMapping,
    pub baseline: BaselineKind,
    pub spec: ProblemSpec,
}

/// Generates the problem instance named by the config. Instance data comes
/// from RNG stream 0 of the seed, the start point from stream 1.
pub fn generate(cfg: &ExperimentConfig) -> Result<GeneratedProblem> {
    let mut start_rng = init_rng(cfg.seed);
    match cfg.problem {
        ProblemKind::MatrixSensing => {
            let (oracle, instance) = gen_matrix_sensing(
                cfg.d,
                cfg.r,
                cfg.m,
                cfg.kappa_tilde,
                cfg.ensemble,
                cfg.seed,
            )?;
            let x0 = instance.initial_point(&mut start_rng);
            Ok(GeneratedProblem {
                oracle,
                x0,
                fallback: polyak_map(),
                baseline: cfg.baseline,
                spec: ProblemSpec::MatrixSensing {
                    d: cfg.d,
                    r: cfg.r,
                    m: cfg.m,
                    kappa_tilde: cfg.kappa_tilde,
                    ensemble: cfg.ensemble,
                    seed: cfg.seed,
                },
            })
        }
        ProblemKind::MaxLinear => {
            let (oracle, instance) = gen_max_linear(cfg.d, cfg.r, cfg.m, cfg.seed)?;
            let x0 = instance.initial_point(&mut start_rng);
            Ok(GeneratedProblem {
                oracle,
                x0,
                fallback: polyak_map(),
                baseline: cfg.baseline,
                spec: ProblemSpec::MaxLinear {
                    d: cfg.d,
                    r: cfg.r,
                    m: cfg.m,
                    seed: cfg.seed,
                },
            })
        }
        ProblemKind::PhaseRetrieval => {
            let (oracle, instance, mapping) = gen_phase_retrieval(cfg.d, cfg.m, cfg.seed)?;
            let x0 = instance.initial_point(&mut start_rng);
            let fallback = if cfg.baseline == BaselineKind::PolyakSgm {
                polyak_map()
            } else {
                mapping
            };
            Ok(GeneratedProblem {
                oracle,
                x0,
                fallback,
                baseline: cfg.baseline,
                spec: ProblemSpec::PhaseRetrieval {
                    d: cfg.d,
                    m: cfg.m,
                    seed: cfg.seed,
                },
            })
        }
        ProblemKind::CompressedSensing => {
            let (oracle, instance, mapping) = gen_compressed_sensing_with(
                cfg.d,
                cfg.m,
                cfg.s,
                cfg.lambda,
                cfg.seed,
                cfg.literal_prox,
            )?;
            let x0 = instance.initial_point();
            let fallback = if cfg.baseline == BaselineKind::PolyakSgm {
                polyak_map()
            } else {
                mapping
            };
            Ok(GeneratedProblem {
                oracle,
                x0,
                fallback,
                baseline: cfg.baseline,
                spec: ProblemSpec::CompressedSensing {
                    d: cfg.d,
                    m: cfg.m,
                    s: cfg.s,
                    lambda: cfg.lambda,
                    literal_prox: cfg.literal_prox,
                    seed: cfg.seed,
                },
            })
        }
    }
}

/// One finished run, ready for CSV emission.
pub struct RunOutput {
    pub label: &'static str,
    pub history: RunHistory,
    pub counter: OracleCounter,
    pub final_gap: f64,
    pub status: RunStatus,
    pub wall_time_sec: f64,
    pub outer_iterations: u64,
    pub bundle_accepted: u64,
    pub bundle_rejected: u64,
}

/// Summary row derived from a run.
#[derive(Clone, Debug)]
pub struct SummaryRow {
    pub label: &'static str,
    pub final_gap: f64,
    pub total_oracle_calls: u64,
    pub f_calls: u64,
    pub g_calls: u64,
    pub mapping_calls: u64,
    pub wall_time_sec: f64,
    pub outer_iterations: u64,
    pub bundle_acceptance_rate: f64,
    pub status: RunStatus,
}

/// Builds summary rows from finished runs.
pub fn summarize(runs: &[RunOutput]) -> Vec<SummaryRow> {
    runs.iter()
        .map(|run| {
            let attempts = run.bundle_accepted + run.bundle_rejected;
            SummaryRow {
                label: run.label,
                final_gap: run.final_gap,
                total_oracle_calls: run.counter.total(),
                f_calls: run.counter.f_calls,
                g_calls: run.counter.g_calls,
                mapping_calls: run.counter.mapping_calls,
                wall_time_sec: run.wall_time_sec,
                outer_iterations: run.outer_iterations,
                bundle_acceptance_rate: if attempts == 0 {
                    0.0
                } else {
                    run.bundle_accepted as f64 / attempts as f64
                },
                status: run.status,
            }
        })
        .collect()
}

/// Runs the coupled solver on a generated problem.
pub fn run_coupled(problem: &GeneratedProblem, solver: &SuperConfig) -> Result<RunOutput> {
    let start = Instant::now();
    let report = run_superpolyak(&problem.oracle, &problem.fallback, &problem.x0, solver)?;
    Ok(RunOutput {
        label: "superpolyak",
        final_gap: report.gap,
        status: report.status,
        wall_time_sec: start.elapsed().as_secs_f64(),
        outer_iterations: report.outer_iterations(),
        bundle_accepted: report.bundle_accepted(),
        bundle_rejected: report.bundle_rejected(),
        history: report.history,
        counter: report.counter,
    })
}

/// Runs the baseline method alone to `baseline_eps`. The Polyak subgradient
/// baseline goes through `run_sgm` (one `f` and one `g` per iteration); the
/// mapping baselines iterate the fallback mapping.
pub fn run_baseline(
    problem: &GeneratedProblem,
    baseline_eps: f64,
    budget: u64,
) -> Result<RunOutput> {
    let start = Instant::now();
    let mut counter = OracleCounter::new();
    let mut history = RunHistory::new();

    if problem.baseline == BaselineKind::PolyakSgm {
        let cfg = crate::polyak_sgm::SgmConfig {
            eps: baseline_eps,
            max_g_calls: budget,
        };
        let out = crate::polyak_sgm::run_sgm(
            &problem.oracle,
            &mut counter,
            &problem.x0,
            &cfg,
            &mut history,
        )?;
        return Ok(RunOutput {
            label: "baseline",
            final_gap: out.gap,
            status: out.status,
            wall_time_sec: start.elapsed().as_secs_f64(),
            outer_iterations: out.iterations,
            bundle_accepted: 0,
            bundle_rejected: 0,
            history,
            counter,
        });
    }

    let initial_gap = gap(&problem.oracle, &mut counter, &problem.x0)?;
    record(&mut history, &counter, initial_gap, StepKind::Init);
    let out = if initial_gap <= baseline_eps {
        crate::fallbacks::FallbackResult {
            point: problem.x0.clone(),
            gap: initial_gap,
            status: RunStatus::Converged,
            applications: 0,
        }
    } else {
        fallback_run(
            &problem.fallback,
            &problem.oracle,
            &mut counter,
            &problem.x0,
            baseline_eps,
            budget,
            &mut history,
            Some(initial_gap),
        )?
    };
    Ok(RunOutput {
        label: "baseline",
        final_gap: out.gap,
        status: out.status,
        wall_time_sec: start.elapsed().as_secs_f64(),
        outer_iterations: out.applications,
        bundle_accepted: 0,
        bundle_rejected: 0,
        history,
        counter,
    })
}

/// CSV schema of the trajectory files.
pub const TRAJECTORY_HEADER: &str = "idx,oracle_calls,f_gap,elapsed_sec,step_type";

/// Writes one trajectory CSV. The gap column carries 17 significant digits
/// so values round-trip exactly.
pub fn write_trajectory(path: &Path, history: &RunHistory) -> Result<()> {
    let mut out = String::new();
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (idx, rec) in history.records().iter().enumerate() {
        out.push_str(&format!(
            "{},{},{:.16e},{:.6},{}\n",
            idx,
            rec.oracle_calls,
            rec.gap,
            rec.elapsed_sec,
            rec.kind.as_str()
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Writes the summary CSV.
pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut out = String::from(
        "run,final_gap,total_oracle_calls,f_calls,g_calls,mapping_calls,\
         wall_time_sec,outer_iterations,bundle_acceptance_rate,status\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{:.16e},{},{},{},{},{:.6},{},{:.6},{}\n",
            row.label,
            row.final_gap,
            row.total_oracle_calls,
            row.f_calls,
            row.g_calls,
            row.mapping_calls,
            row.wall_time_sec,
            row.outer_iterations,
            row.bundle_acceptance_rate,
            match row.status {
                RunStatus::Converged => "converged",
                RunStatus::BudgetExhausted => "budget_exhausted",
                RunStatus::Stalled => "stalled",
            }
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Exit status of [`run_experiment`]: 0 when both runs reached their target
/// gap, 2 when either exhausted its budget or stalled.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<i32> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output_dir)?;
    let problem = generate(cfg)?;

    let mut instance_file = fs::File::create(cfg.output_dir.join("instance.json"))?;
    instance_file.write_all(problem.spec.to_json().as_bytes())?;
    instance_file.write_all(b"\n")?;

    let coupled = run_coupled(&problem, &cfg.solver)?;
    let baseline_budget = cfg.solver.max_oracle.unwrap_or(10_000_000);
    let baseline = run_baseline(&problem, cfg.baseline_eps, baseline_budget)?;

    write_trajectory(&cfg.output_dir.join("superpolyak.csv"), &coupled.history)?;
    write_trajectory(&cfg.output_dir.join("baseline.csv"), &baseline.history)?;

    let runs = [coupled, baseline];
    let rows = summarize(&runs);
    write_summary(&cfg.output_dir.join("summary.csv"), &rows)?;

    let ok = runs.iter().all(|r| r.status == RunStatus::Converged);
    Ok(if ok { 0 } else { 2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_cs_config(dir: PathBuf) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(ProblemKind::CompressedSensing, 40, 1, dir);
        cfg.m = 12;
        cfg.s = 2;
        cfg
    }

    #[test]
    fn summarize_single_run() {
        let mut counter = OracleCounter::new();
        counter.f_calls = 3;
        counter.g_calls = 2;
        counter.mapping_calls = 1;
        let run = RunOutput {
            label: "baseline",
            history: RunHistory::new(),
            counter,
            final_gap: 1e-9,
            status: RunStatus::Converged,
            wall_time_sec: 0.5,
            outer_iterations: 4,
            bundle_accepted: 3,
            bundle_rejected: 1,
        };
        let rows = summarize(&[run]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].total_oracle_calls, 6);
        assert!((rows[0].bundle_acceptance_rate - 0.75).abs() < 1e-15);
    }

    #[test]
    fn acceptance_rate_zero_when_no_bundles() {
        let run = RunOutput {
            label: "baseline",
            history: RunHistory::new(),
            counter: OracleCounter::new(),
            final_gap: 0.0,
            status: RunStatus::Converged,
            wall_time_sec: 0.0,
            outer_iterations: 0,
            bundle_accepted: 0,
            bundle_rejected: 0,
        };
        assert_eq!(summarize(&[run])[0].bundle_acceptance_rate, 0.0);
    }

    #[test]
    fn invalid_baseline_combo_is_rejected() {
        let dir = std::env::temp_dir().join("sp_harness_validate");
        let mut cfg = tiny_cs_config(dir);
        cfg.baseline = BaselineKind::AlternatingProjections;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn subgradient_baseline_uses_sgm_accounting() {
        let dir = std::env::temp_dir().join("sp_harness_sgm_baseline");
        let mut cfg = ExperimentConfig::new(ProblemKind::MaxLinear, 6, 1, dir);
        cfg.r = 2;
        cfg.m = 36;
        let problem = generate(&cfg).unwrap();
        let out = run_baseline(&problem, 1e-10, 1_000_000).unwrap();
        assert_eq!(out.status, RunStatus::Converged);
        assert_eq!(out.counter.mapping_calls, 0);
        assert_eq!(out.counter.g_calls, out.outer_iterations);
        assert_eq!(out.counter.f_calls, out.outer_iterations + 1);
    }

    #[test]
    fn experiment_writes_all_files() {
        let dir = std::env::temp_dir().join(format!("sp_harness_{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let cfg = tiny_cs_config(dir.clone());
        let code = run_experiment(&cfg).unwrap();
        assert_eq!(code, 0);
        for name in ["superpolyak.csv", "baseline.csv", "summary.csv", "instance.json"] {
            assert!(dir.join(name).exists(), "{name} missing");
        }
        let body = fs::read_to_string(dir.join("superpolyak.csv")).unwrap();
        assert!(body.starts_with(TRAJECTORY_HEADER));
        let _ = fs::remove_dir_all(&dir);
    }
}
