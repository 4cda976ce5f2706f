//! Polyak-stepsize subgradient descent.
//!
//! The step `z - (f(z) - f*) v / ||v||^2` with `v` a generalized-gradient
//! selection is the exact minimizer-projection step for a linear model of
//! `f`. On sharp problems it contracts the distance to the solution set by
//! a factor `sqrt(1 - mu^2 / 4L^2)` per step, which makes it both a usable
//! standalone method and the default fallback for the coupled driver.

use crate::error::{Result, SolverError};
use crate::oracle::{gap, record, Oracle, OracleCounter, RunHistory, StepKind};
use crate::qr_bundle::{axpy, dot};

/// Relative threshold under which a gradient is treated as zero.
pub const ZERO_GRAD_TOL: f64 = 1e-14;

/// Configuration for [`run_sgm`].
#[derive(Clone, Copy, Debug)]
pub struct SgmConfig {
    /// Target function gap.
    pub eps: f64,
    /// Budget on generalized-gradient evaluations.
    pub max_g_calls: u64,
}

impl SgmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(SolverError::InvalidConfig("eps must be positive".into()));
        }
        if self.max_g_calls == 0 {
            return Err(SolverError::InvalidConfig(
                "gradient budget must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Run status shared by the iterative solvers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    BudgetExhausted,
    /// One full outer iteration produced no gap reduction.
    Stalled,
}

/// Result of [`run_sgm`].
#[derive(Clone, Debug)]
pub struct SgmResult {
    /// Best-gap iterate seen.
    pub point: Vec<f64>,
    pub gap: f64,
    pub status: RunStatus,
    pub iterations: u64,
}

/// One Polyak step from `z`: `z - (f(z) - f*) v / ||v||^2` with `v = g(z)`.
///
/// Costs one `f` and one `g` evaluation. When `||v||` is numerically zero
/// (below `1e-14 * max(1, |gap|)`), returns `z` unchanged.
pub fn polyak_step(oracle: &Oracle, counter: &mut OracleCounter, z: &[f64]) -> Result<Vec<f64>> {
    let g = gap(oracle, counter, z)?;
    polyak_step_with_gap(oracle, counter, z, g)
}

/// Polyak step with the gap already known, so only `g` is evaluated.
pub fn polyak_step_with_gap(
    oracle: &Oracle,
    counter: &mut OracleCounter,
    z: &[f64],
    known_gap: f64,
) -> Result<Vec<f64>> {
    let v = oracle.eval_g(counter, z)?;
    let vnorm = dot(&v, &v).sqrt();
    if vnorm <= ZERO_GRAD_TOL * known_gap.abs().max(1.0) {
        return Ok(z.to_vec());
    }
    let mut next = z.to_vec();
    axpy(-known_gap / (vnorm * vnorm), &v, &mut next);
    Ok(next)
}

/// Runs the Polyak subgradient method from `z0` until the gap is at most
/// `cfg.eps` or the gradient budget is exhausted, in which case the best-gap
/// iterate is returned with a `BudgetExhausted` status (the method is not
/// monotone in `f`, so last-iterate would lose information).
///
/// Each iteration costs exactly one `f` and one `g` evaluation; the
/// stopping-test value is reused as the next step's gap.
pub fn run_sgm(
    oracle: &Oracle,
    counter: &mut OracleCounter,
    z0: &[f64],
    cfg: &SgmConfig,
    history: &mut RunHistory,
) -> Result<SgmResult> {
    cfg.validate()?;
    let mut z = z0.to_vec();
    let mut cur_gap = gap(oracle, counter, &z)?;
    record(history, counter, cur_gap, StepKind::Init);

    let mut best = z.clone();
    let mut best_gap = cur_gap;
    let mut g_used = 0u64;
    let mut iterations = 0u64;

    loop {
        if cur_gap <= cfg.eps {
            return Ok(SgmResult {
                point: z,
                gap: cur_gap,
                status: RunStatus::Converged,
                iterations,
            });
        }
        if g_used >= cfg.max_g_calls {
            return Ok(SgmResult {
                point: best,
                gap: best_gap,
                status: RunStatus::BudgetExhausted,
                iterations,
            });
        }
        let next = polyak_step_with_gap(oracle, counter, &z, cur_gap)?;
        g_used += 1;
        iterations += 1;
        if next == z {
            // Zero gradient at a non-optimal point: no direction to move.
            return Ok(SgmResult {
                point: best,
                gap: best_gap,
                status: RunStatus::Stalled,
                iterations,
            });
        }
        z = next;
        cur_gap = gap(oracle, counter, &z)?;
        record(history, counter, cur_gap, StepKind::Fallback);
        if cur_gap < best_gap {
            best_gap = cur_gap;
            best = z.clone();
        }
    }
}
