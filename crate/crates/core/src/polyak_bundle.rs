//! Bundle linearization steps.
//!
//! Starting from `y0 = x`, the loop accumulates linearizations
//! `f(y_j) - f* + <v_j, . - y_j> = 0` and moves to the closest point to `y0`
//! satisfying all of them, solved in `O(d*i)` per step through the
//! incremental QR state. Near a sharp semismooth minimizer one of the
//! constructed points improves superlinearly on `y0` within `d` steps.
//!
//! The loop terminates early on rank deficiency (one dense pseudoinverse
//! solve, then exit), on a step traveling further than `tau * gap(y0)`, on
//! superlinear improvement `gap(y_i) <= gap(y0)^(1+eta_est)`, or on a zero
//! gap. Candidates are restricted to the travel ball around `y0`; `y0`
//! itself is never a candidate.

use crate::error::{Result, SolverError};
use crate::oracle::{gap, Oracle, OracleCounter};
use crate::qr_bundle::{
    self, apply_pinv, axpy, dot, pinv_dense_oracle, qr_append, qr_init, AppendResult,
};

/// Gap at or below this value counts as an exact zero for termination.
pub const ZERO_GAP_TOL: f64 = 1e-15;

/// Configuration for one [`run_bundle`] call.
#[derive(Clone, Copy, Debug)]
pub struct BundleConfig {
    /// Travel radius multiplier: candidates must stay within
    /// `tau * gap(y0)` of `y0`.
    pub tau: f64,
    /// Superlinear-improvement exponent estimate used by the early stop.
    pub eta_est: f64,
    /// Maximum number of bundle steps; `None` means the ambient dimension.
    pub max_steps: Option<usize>,
    /// Record the per-step trail (points, gaps, gradients) for diagnostics.
    pub record_trail: bool,
}

impl BundleConfig {
    pub fn new(tau: f64) -> Self {
        BundleConfig {
            tau,
            eta_est: 1.0,
            max_steps: None,
            record_trail: false,
        }
    }

    fn validate(&self, dim: usize) -> Result<usize> {
        if !(self.tau > 0.0) {
            return Err(SolverError::InvalidConfig("tau must be positive".into()));
        }
        if !(self.eta_est > 0.0 && self.eta_est <= 2.0) {
            return Err(SolverError::InvalidConfig(
                "eta_est must lie in (0, 2]".into(),
            ));
        }
        let max_steps = self.max_steps.unwrap_or(dim);
        if max_steps == 0 || max_steps > dim {
            return Err(SolverError::InvalidConfig(format!(
                "max_steps must lie in 1..={dim}"
            )));
        }
        Ok(max_steps)
    }
}

/// Why a bundle call stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BundleTermination {
    /// All steps ran without an early stop.
    ExhaustedD,
    /// A new gradient row was dependent; finished with one dense solve.
    RankDeficient,
    /// A step left the travel ball around `y0`.
    LargeTravel,
    /// `gap(y_i) <= gap(y0)^(1+eta_est)` with `gap(y0) < 1`.
    SuperlinearHit,
    /// A step reached gap zero (within tolerance).
    ZeroGap,
}

/// One recorded step of the bundle trail (diagnostics only).
#[derive(Clone, Debug)]
pub struct TrailStep {
    pub point: Vec<f64>,
    pub gap: f64,
    /// Gradient selected at this point, when one was fetched.
    pub grad: Option<Vec<f64>>,
}

/// Result of one bundle call.
#[derive(Clone, Debug)]
pub struct BundleOutcome {
    /// Best travel-feasible candidate, absent when no constructed point
    /// stayed inside the ball.
    pub candidate: Option<Vec<f64>>,
    pub termination: BundleTermination,
    /// Generalized-gradient evaluations spent by this call.
    pub g_calls_used: u64,
    /// Gap of `candidate`, or infinity when absent.
    pub best_gap: f64,
    /// Per-step trail; empty unless `record_trail` was set.
    pub trail: Vec<TrailStep>,
}

/// The bundle correction from `y0` given the current QR state and stacked
/// residuals `f(y_j) - f* + <v_j, y0 - y_j>`: the closest point to `y0`
/// satisfying all accumulated linearized equations.
pub fn bundle_step(state: &qr_bundle::QrState, y0: &[f64], residuals: &[f64]) -> Vec<f64> {
    let correction = apply_pinv(state, residuals);
    let mut y = y0.to_vec();
    axpy(-1.0, &correction, &mut y);
    y
}

/// Runs one full bundle call from `x` (Algorithm: build up to `max_steps`
/// linearizations, with early termination as described at module level).
pub fn run_bundle(
    oracle: &Oracle,
    counter: &mut OracleCounter,
    x: &[f64],
    cfg: &BundleConfig,
) -> Result<BundleOutcome> {
    let dim = oracle.dim();
    let max_steps = cfg.validate(dim)?;
    let g_before = counter.g_calls;

    let gap0 = gap(oracle, counter, x)?;
    let mut trail = Vec::new();
    if gap0 <= ZERO_GAP_TOL {
        // Degenerate input: already optimal.
        return Ok(BundleOutcome {
            candidate: Some(x.to_vec()),
            termination: BundleTermination::ZeroGap,
            g_calls_used: 0,
            best_gap: gap0,
            trail,
        });
    }

    let v0 = oracle.eval_g(counter, x)?;
    if cfg.record_trail {
        trail.push(TrailStep {
            point: x.to_vec(),
            gap: gap0,
            grad: Some(v0.clone()),
        });
    }
    let mut state = qr_init(&v0)?;
    let mut residuals = vec![gap0];
    let travel_limit = cfg.tau * gap0;

    let mut best: Option<(Vec<f64>, f64)> = None;
    let finish = |best: Option<(Vec<f64>, f64)>,
                  termination: BundleTermination,
                  g_used: u64,
                  trail: Vec<TrailStep>| {
        let (candidate, best_gap) = match best {
            Some((point, g)) => (Some(point), g),
            None => (None, f64::INFINITY),
        };
        Ok(BundleOutcome {
            candidate,
            termination,
            g_calls_used: g_used,
            best_gap,
            trail,
        })
    };

    for step in 1..=max_steps {
        let y = bundle_step(&state, x, &residuals);
        let travel = distance(&y, x);
        if travel > travel_limit {
            return finish(
                best,
                BundleTermination::LargeTravel,
                counter.g_calls - g_before,
                trail,
            );
        }
        let gap_y = gap(oracle, counter, &y)?;
        if best.as_ref().is_none_or(|(_, bg)| gap_y < *bg) {
            best = Some((y.clone(), gap_y));
        }
        if cfg.record_trail {
            trail.push(TrailStep {
                point: y.clone(),
                gap: gap_y,
                grad: None,
            });
        }
        if gap_y <= ZERO_GAP_TOL {
            return finish(
                Some((y, gap_y)),
                BundleTermination::ZeroGap,
                counter.g_calls - g_before,
                trail,
            );
        }
        if gap0 < 1.0 && gap_y <= gap0.powf(1.0 + cfg.eta_est) {
            return finish(
                Some((y, gap_y)),
                BundleTermination::SuperlinearHit,
                counter.g_calls - g_before,
                trail,
            );
        }
        if step == max_steps {
            // The final gradient would never enter a solve; skip fetching it.
            break;
        }

        let v = oracle.eval_g(counter, &y)?;
        if let Some(last) = trail.last_mut() {
            last.grad = Some(v.clone());
        }
        let mut y0_minus_y = x.to_vec();
        axpy(-1.0, &y, &mut y0_minus_y);
        let residual = gap_y + dot(&v, &y0_minus_y);

        match qr_append(&mut state, &v) {
            AppendResult::Updated => residuals.push(residual),
            AppendResult::RankDeficient => {
                // Dense escape: solve once with the rank-deficient stack,
                // then exit.
                let mut rows = state.rows().to_vec();
                rows.push(v);
                let mut res_ext = residuals.clone();
                res_ext.push(residual);
                let correction = pinv_dense_oracle(&rows, &res_ext);
                let mut y_dense = x.to_vec();
                axpy(-1.0, &correction, &mut y_dense);
                if distance(&y_dense, x) <= travel_limit {
                    let gap_dense = gap(oracle, counter, &y_dense)?;
                    if cfg.record_trail {
                        trail.push(TrailStep {
                            point: y_dense.clone(),
                            gap: gap_dense,
                            grad: None,
                        });
                    }
                    if best.as_ref().is_none_or(|(_, bg)| gap_dense < *bg) {
                        best = Some((y_dense, gap_dense));
                    }
                }
                return finish(
                    best,
                    BundleTermination::RankDeficient,
                    counter.g_calls - g_before,
                    trail,
                );
            }
        }
    }

    finish(
        best,
        BundleTermination::ExhaustedD,
        counter.g_calls - g_before,
        trail,
    )
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
