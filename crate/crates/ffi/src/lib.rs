//! C ABI for the superpolyak library: opaque problem and report handles,
//! plain status codes, and flat `repr(C)` option/row structs. The header is
//! generated into `include/superpolyak.h` at build time.
//!
//! Ownership rules: every `*_create`/`*_solve*` function hands back an owned
//! handle that must be released with the matching `*_free`; output buffers
//! are caller-allocated and their lengths are always checked.

use std::panic::{catch_unwind, AssertUnwindSafe};

use superpolyak::harness::{
    generate, run_baseline, ExperimentConfig, GeneratedProblem, ProblemKind,
};
use superpolyak::polyak_sgm::RunStatus;
use superpolyak::problems::Ensemble;
use superpolyak::solver::{run_superpolyak, SuperConfig};
use superpolyak::{OracleCounter, SolverError, StepKind};

/// Status code returned by every fallible C-ABI call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ZeroGradient = 3,
    BufferTooSmall = 4,
    InternalPanic = 5,
}

/// Problem family selector.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpProblemKind {
    MatrixSensing = 0,
    MaxLinear = 1,
    PhaseRetrieval = 2,
    CompressedSensing = 3,
}

/// Measurement ensemble for matrix sensing.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpEnsemble {
    Gaussian = 0,
    Hadamard = 1,
}

/// Terminal state of a run.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpRunStatus {
    Converged = 0,
    BudgetExhausted = 1,
    Stalled = 2,
}

/// Step kind tags used in history rows.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpStepKind {
    Init = 0,
    Fallback = 1,
    BundleAccepted = 2,
    BundleRejected = 3,
}

/// Solver options; obtain defaults from `sp_solve_options_default`.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SpSolveOptions {
    pub eps: f64,
    pub omega: f64,
    pub gamma: f64,
    pub eta_est0: f64,
    pub eta_lb: f64,
    pub q: f64,
    pub tau_max: f64,
    pub max_outer: u64,
    pub fallback_budget: u64,
    /// 0 means unlimited.
    pub max_oracle: u64,
}

/// One convergence-trace record.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct SpHistoryRow {
    pub oracle_calls: u64,
    pub f_gap: f64,
    pub elapsed_sec: f64,
    pub step_kind: SpStepKind,
}

/// Opaque problem handle.
pub struct SpProblem {
    inner: GeneratedProblem,
}

/// Opaque run-report handle.
pub struct SpReport {
    point: Vec<f64>,
    gap: f64,
    status: RunStatus,
    rows: Vec<SpHistoryRow>,
    counter: OracleCounter,
}

fn status_of_error(err: &SolverError) -> SpStatus {
    match err {
        SolverError::ZeroGradient => SpStatus::ZeroGradient,
        _ => SpStatus::InvalidArgument,
    }
}

fn run_status(status: RunStatus) -> SpRunStatus {
    match status {
        RunStatus::Converged => SpRunStatus::Converged,
        RunStatus::BudgetExhausted => SpRunStatus::BudgetExhausted,
        RunStatus::Stalled => SpRunStatus::Stalled,
    }
}

fn history_rows(history: &superpolyak::RunHistory) -> Vec<SpHistoryRow> {
    history
        .records()
        .iter()
        .map(|rec| SpHistoryRow {
            oracle_calls: rec.oracle_calls,
            f_gap: rec.gap,
            elapsed_sec: rec.elapsed_sec,
            step_kind: match rec.kind {
                StepKind::Init => SpStepKind::Init,
                StepKind::Fallback => SpStepKind::Fallback,
                StepKind::BundleAccepted => SpStepKind::BundleAccepted,
                StepKind::BundleRejected => SpStepKind::BundleRejected,
            },
        })
        .collect()
}

fn guard(status: &mut SpStatus, body: impl FnOnce() -> SpStatus) {
    *status = match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => s,
        Err(_) => SpStatus::InternalPanic,
    };
}

/// Fills `out` with the default solver options.
///
/// # Safety
/// `out` must point to writable memory for one `SpSolveOptions`.
#[no_mangle]
pub unsafe extern "C" fn sp_solve_options_default(out: *mut SpSolveOptions) -> SpStatus {
    if out.is_null() {
        return SpStatus::NullPointer;
    }
    let defaults = SuperConfig::default();
    *out = SpSolveOptions {
        eps: defaults.eps,
        omega: defaults.omega,
        gamma: defaults.gamma,
        eta_est0: defaults.eta_est0,
        eta_lb: defaults.eta_lb,
        q: defaults.q,
        tau_max: defaults.tau_max,
        max_outer: defaults.max_outer,
        fallback_budget: defaults.fallback_budget,
        max_oracle: 0,
    };
    SpStatus::Ok
}

/// Creates a seeded problem instance.
///
/// Unused parameters for a family are ignored; `lambda <= 0` selects the
/// library default penalty. On success `*out` owns the handle.
///
/// # Safety
/// `out` must point to writable memory for one pointer.
#[no_mangle]
pub unsafe extern "C" fn sp_problem_create(
    kind: SpProblemKind,
    d: usize,
    r: usize,
    m: usize,
    s: usize,
    kappa: f64,
    lambda: f64,
    literal_prox: bool,
    ensemble: SpEnsemble,
    seed: u64,
    out: *mut *mut SpProblem,
) -> SpStatus {
    if out.is_null() {
        return SpStatus::NullPointer;
    }
    let mut status = SpStatus::Ok;
    guard(&mut status, || {
        let problem_kind = match kind {
            SpProblemKind::MatrixSensing => ProblemKind::MatrixSensing,
            SpProblemKind::MaxLinear => ProblemKind::MaxLinear,
            SpProblemKind::PhaseRetrieval => ProblemKind::PhaseRetrieval,
            SpProblemKind::CompressedSensing => ProblemKind::CompressedSensing,
        };
        let mut cfg = ExperimentConfig::new(problem_kind, d, seed, std::path::PathBuf::new());
        cfg.r = r;
        cfg.m = m;
        cfg.s = s;
        cfg.kappa_tilde = kappa;
        cfg.lambda = if lambda > 0.0 { Some(lambda) } else { None };
        cfg.literal_prox = literal_prox;
        cfg.ensemble = match ensemble {
            SpEnsemble::Gaussian => Ensemble::Gaussian,
            SpEnsemble::Hadamard => Ensemble::Hadamard,
        };
        match generate(&cfg) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SpProblem { inner }));
                SpStatus::Ok
            }
            Err(err) => status_of_error(&err),
        }
    });
    status
}

/// Releases a problem handle. Null is a no-op.
///
/// # Safety
/// `problem` must be null or a handle produced by `sp_problem_create` that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn sp_problem_free(problem: *mut SpProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Ambient dimension of the problem's variable (0 on null).
///
/// # Safety
/// `problem` must be null or a live problem handle.
#[no_mangle]
pub unsafe extern "C" fn sp_problem_dim(problem: *const SpProblem) -> usize {
    if problem.is_null() {
        return 0;
    }
    let problem = &*problem;
    problem.inner.oracle.dim()
}

/// Copies the seeded start point into `buf` (length must equal the problem
/// dimension).
///
/// # Safety
/// `problem` must be a live handle; `buf` must point to `len` writable f64s.
#[no_mangle]
pub unsafe extern "C" fn sp_problem_initial_point(
    problem: *const SpProblem,
    buf: *mut f64,
    len: usize,
) -> SpStatus {
    if problem.is_null() || buf.is_null() {
        return SpStatus::NullPointer;
    }
    let x0 = &(*problem).inner.x0;
    if len < x0.len() {
        return SpStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(x0.as_ptr(), buf, x0.len());
    SpStatus::Ok
}

/// Evaluates the objective gap `f(x) - f*` at `x`.
///
/// # Safety
/// `problem` must be a live handle; `x` must point to `len` f64s; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_problem_gap(
    problem: *const SpProblem,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> SpStatus {
    if problem.is_null() || x.is_null() || out.is_null() {
        return SpStatus::NullPointer;
    }
    let mut status = SpStatus::Ok;
    guard(&mut status, || {
        let point = std::slice::from_raw_parts(x, len);
        let mut counter = OracleCounter::new();
        match superpolyak::gap(&(*problem).inner.oracle, &mut counter, point) {
            Ok(g) => {
                *out = g;
                SpStatus::Ok
            }
            Err(err) => status_of_error(&err),
        }
    });
    status
}

fn options_to_config(opts: &SpSolveOptions) -> SuperConfig {
    SuperConfig {
        eps: opts.eps,
        omega: opts.omega,
        gamma: opts.gamma,
        eta_est0: opts.eta_est0,
        eta_lb: opts.eta_lb,
        q: opts.q,
        tau_max: opts.tau_max,
        max_outer: opts.max_outer,
        fallback_budget: opts.fallback_budget,
        max_oracle: if opts.max_oracle == 0 {
            None
        } else {
            Some(opts.max_oracle)
        },
    }
}

/// Runs the coupled solver on the problem. `x0`/`x0_len` may be null/0 to
/// use the seeded start point; `opts` may be null for defaults. On success
/// `*out` owns the report.
///
/// # Safety
/// Pointers must be null or valid as documented; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_solve(
    problem: *const SpProblem,
    x0: *const f64,
    x0_len: usize,
    opts: *const SpSolveOptions,
    out: *mut *mut SpReport,
) -> SpStatus {
    if problem.is_null() || out.is_null() {
        return SpStatus::NullPointer;
    }
    let mut status = SpStatus::Ok;
    guard(&mut status, || {
        let inner = &(*problem).inner;
        let start: Vec<f64> = if x0.is_null() {
            inner.x0.clone()
        } else {
            std::slice::from_raw_parts(x0, x0_len).to_vec()
        };
        let cfg = if opts.is_null() {
            SuperConfig::default()
        } else {
            options_to_config(&*opts)
        };
        match run_superpolyak(&inner.oracle, &inner.fallback, &start, &cfg) {
            Ok(report) => {
                let handle = SpReport {
                    rows: history_rows(&report.history),
                    point: report.point,
                    gap: report.gap,
                    status: report.status,
                    counter: report.counter,
                };
                *out = Box::into_raw(Box::new(handle));
                SpStatus::Ok
            }
            Err(err) => status_of_error(&err),
        }
    });
    status
}

/// Runs the problem's first-order baseline mapping alone until the gap
/// drops below `eps` or `budget` applications are spent.
///
/// # Safety
/// `problem` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_solve_baseline(
    problem: *const SpProblem,
    eps: f64,
    budget: u64,
    out: *mut *mut SpReport,
) -> SpStatus {
    if problem.is_null() || out.is_null() {
        return SpStatus::NullPointer;
    }
    let mut status = SpStatus::Ok;
    guard(&mut status, || {
        match run_baseline(&(*problem).inner, eps, budget) {
            Ok(run) => {
                let handle = SpReport {
                    rows: history_rows(&run.history),
                    point: Vec::new(),
                    gap: run.final_gap,
                    status: run.status,
                    counter: run.counter,
                };
                *out = Box::into_raw(Box::new(handle));
                SpStatus::Ok
            }
            Err(err) => status_of_error(&err),
        }
    });
    status
}

/// Releases a report handle. Null is a no-op.
///
/// # Safety
/// `report` must be null or an unfreed report handle.
#[no_mangle]
pub unsafe extern "C" fn sp_report_free(report: *mut SpReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Terminal status of the run.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn sp_report_status(report: *const SpReport) -> SpRunStatus {
    if report.is_null() {
        return SpRunStatus::Stalled;
    }
    let report = &*report;
    run_status(report.status)
}

/// Final (best) function gap of the run.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn sp_report_final_gap(report: *const SpReport) -> f64 {
    if report.is_null() {
        return f64::NAN;
    }
    let report = &*report;
    report.gap
}

/// Length of the returned solution vector (0 for baseline reports).
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn sp_report_solution_len(report: *const SpReport) -> usize {
    if report.is_null() {
        return 0;
    }
    let report = &*report;
    report.point.len()
}

/// Copies the solution vector into `buf`.
///
/// # Safety
/// `report` must be a live handle; `buf` must point to `len` writable f64s.
#[no_mangle]
pub unsafe extern "C" fn sp_report_solution(
    report: *const SpReport,
    buf: *mut f64,
    len: usize,
) -> SpStatus {
    if report.is_null() || buf.is_null() {
        return SpStatus::NullPointer;
    }
    let point = &(*report).point;
    if len < point.len() {
        return SpStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(point.as_ptr(), buf, point.len());
    SpStatus::Ok
}

/// Number of history records in the report.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn sp_report_history_len(report: *const SpReport) -> usize {
    if report.is_null() {
        return 0;
    }
    let report = &*report;
    report.rows.len()
}

/// Copies history record `idx` into `row`.
///
/// # Safety
/// `report` must be a live handle; `row` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_report_history_row(
    report: *const SpReport,
    idx: usize,
    row: *mut SpHistoryRow,
) -> SpStatus {
    if report.is_null() || row.is_null() {
        return SpStatus::NullPointer;
    }
    let report = &*report;
    match report.rows.get(idx) {
        Some(r) => {
            *row = *r;
            SpStatus::Ok
        }
        None => SpStatus::InvalidArgument,
    }
}

/// Reads the run's cumulative oracle counts.
///
/// # Safety
/// `report` must be a live handle; the three outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn sp_report_counts(
    report: *const SpReport,
    f_calls: *mut u64,
    g_calls: *mut u64,
    mapping_calls: *mut u64,
) -> SpStatus {
    if report.is_null() || f_calls.is_null() || g_calls.is_null() || mapping_calls.is_null() {
        return SpStatus::NullPointer;
    }
    let counter = &(*report).counter;
    *f_calls = counter.f_calls;
    *g_calls = counter.g_calls;
    *mapping_calls = counter.mapping_calls;
    SpStatus::Ok
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn sp_strerror(status: SpStatus) -> *const libc::c_char {
    let text: &'static [u8] = match status {
        SpStatus::Ok => b"ok\0",
        SpStatus::NullPointer => b"null pointer argument\0",
        SpStatus::InvalidArgument => b"invalid argument or configuration\0",
        SpStatus::ZeroGradient => b"zero generalized gradient at a non-optimal point\0",
        SpStatus::BufferTooSmall => b"output buffer too small\0",
        SpStatus::InternalPanic => b"internal panic\0",
    };
    text.as_ptr() as *const libc::c_char
}
