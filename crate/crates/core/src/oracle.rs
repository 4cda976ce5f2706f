//! Problem-oracle abstraction and per-run bookkeeping.
//!
//! An [`Oracle`] bundles an objective `f`, its known optimal value `f*`, and
//! a deterministic selection from the generalized gradient mapping `g`. All
//! solvers in this crate consume problems exclusively through this interface
//! and account every evaluation in an [`OracleCounter`] owned by the run.

use std::sync::Arc;
use std::time::Instant;

use crate::error::{Result, SolverError};

type ObjectiveFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// First-order oracle for a single problem instance.
///
/// Immutable after construction and safe to share across concurrent runs;
/// all mutable run state (counters, history) lives outside the oracle.
#[derive(Clone)]
pub struct Oracle {
    dim: usize,
    f_star: f64,
    f: Arc<ObjectiveFn>,
    g: Arc<GradientFn>,
}

impl Oracle {
    /// Builds an oracle over `R^dim` with optimal value `f_star`.
    ///
    /// `g` must be a deterministic selection: two calls at the same point
    /// return the same vector. Tie-breaking at nondifferentiable points is
    /// documented by each problem generator.
    pub fn new<F, G>(dim: usize, f_star: f64, f: F, g: G) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        Oracle {
            dim,
            f_star,
            f: Arc::new(f),
            g: Arc::new(g),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(SolverError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Evaluates `f(x)`, counting one `f` call.
    pub fn eval_f(&self, counter: &mut OracleCounter, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        counter.f_calls += 1;
        Ok((self.f)(x))
    }

    /// Evaluates the gradient selection `g(x)`, counting one `g` call.
    pub fn eval_g(&self, counter: &mut OracleCounter, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        counter.g_calls += 1;
        Ok((self.g)(x))
    }
}

/// Function gap `f(x) - f*`. Never clamped: a tiny negative value from
/// floating-point cancellation at the solution is reported as-is and treated
/// as converged by termination checks.
pub fn gap(oracle: &Oracle, counter: &mut OracleCounter, x: &[f64]) -> Result<f64> {
    Ok(oracle.eval_f(counter, x)? - oracle.f_star())
}

/// Known regularity constants of an instance, when available. Diagnostics
/// and test assertions only; no solver reads these.
#[derive(Clone, Copy, Debug, Default)]
pub struct RegularityMetadata {
    /// Sharpness constant: `f(x) - f* >= mu * dist(x, X*)` near solutions.
    pub mu: Option<f64>,
    /// Bound on the gradient selection norm near solutions.
    pub lipschitz: Option<f64>,
    /// Linearization error coefficient.
    pub c_b: Option<f64>,
    /// Linearization error exponent term (error is `O(dist^(1+eta))`).
    pub eta: Option<f64>,
}

impl RegularityMetadata {
    /// Present values must be strictly positive, except `mu` which may be 0.
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0) => Err(SolverError::InvalidConfig(format!(
                "{name} must be strictly positive when present"
            ))),
            _ => Ok(()),
        };
        if let Some(mu) = self.mu {
            if !(mu >= 0.0) {
                return Err(SolverError::InvalidConfig(
                    "mu must be nonnegative when present".into(),
                ));
            }
        }
        positive("lipschitz", self.lipschitz)?;
        positive("c_b", self.c_b)?;
        positive("eta", self.eta)
    }
}

/// Cumulative evaluation counts for one run. Fallback-map applications are
/// counted separately from `f`/`g` so feasibility-style baselines (which
/// never touch `g`) remain comparable.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleCounter {
    pub f_calls: u64,
    pub g_calls: u64,
    pub mapping_calls: u64,
}

impl OracleCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total(&self) -> u64 {
        self.f_calls + self.g_calls + self.mapping_calls
    }
}

/// Kind of step that produced a history record.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Init,
    Fallback,
    BundleAccepted,
    BundleRejected,
}

impl StepKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StepKind::Init => "init",
            StepKind::Fallback => "fallback",
            StepKind::BundleAccepted => "bundle_accepted",
            StepKind::BundleRejected => "bundle_rejected",
        }
    }
}

/// One trace record: cumulative oracle calls, gap, and elapsed wall time at
/// the moment of recording.
#[derive(Clone, Copy, Debug)]
pub struct HistoryRecord {
    pub oracle_calls: u64,
    pub gap: f64,
    pub elapsed_sec: f64,
    pub kind: StepKind,
}

/// Per-run trace, ordered by recording time. Cumulative oracle calls are
/// strictly increasing across records.
#[derive(Clone, Debug)]
pub struct RunHistory {
    records: Vec<HistoryRecord>,
    started: Instant,
}

impl RunHistory {
    pub fn new() -> Self {
        RunHistory {
            records: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn records(&self) -> &[HistoryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl Default for RunHistory {
    fn default() -> Self {
        Self::new()
    }
}

/// Appends one record with the counter's current cumulative totals and the
/// wall-clock time elapsed since the history was created.
pub fn record(history: &mut RunHistory, counter: &OracleCounter, gap: f64, kind: StepKind) {
    history.records.push(HistoryRecord {
        oracle_calls: counter.total(),
        gap,
        elapsed_sec: history.started.elapsed().as_secs_f64(),
        kind,
    });
}
