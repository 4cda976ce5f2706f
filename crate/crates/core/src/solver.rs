//! The coupled solver: bundle steps with a linearly convergent fallback.
//!
//! Each outer iteration first attempts a bundle call with travel radius
//! `min(omega^(k+1), tau_max) * gap`. If the returned candidate multiplies
//! the gap by less than `gamma`, it is accepted; otherwise the fallback
//! mapping is iterated until it does. Superlinear convergence is retained
//! whenever `omega * gamma < 1`, which is enforced at configuration time.

use crate::error::{Result, SolverError};
use crate::fallbacks::{fallback_run, AlgorithmicMapping};
use crate::oracle::{gap, record, Oracle, OracleCounter, RunHistory, StepKind};
use crate::polyak_bundle::{run_bundle, BundleConfig, BundleTermination};
use crate::polyak_sgm::RunStatus;

/// Configuration for [`run_superpolyak`].
#[derive(Clone, Copy, Debug)]
pub struct SuperConfig {
    /// Target function gap.
    pub eps: f64,
    /// Travel radius growth factor per outer iteration (> 1).
    pub omega: f64,
    /// Required gap reduction factor per outer iteration, in (0, 1).
    pub gamma: f64,
    /// Initial superlinear-exponent estimate for the bundle early stop.
    pub eta_est0: f64,
    /// Floor of the exponent estimate.
    pub eta_lb: f64,
    /// Decay factor applied to the estimate, in (0, 1).
    pub q: f64,
    /// Cap on the travel radius multiplier, guarding `omega^k` overflow.
    pub tau_max: f64,
    /// Maximum number of outer iterations.
    pub max_outer: u64,
    /// Application budget per fallback call.
    pub fallback_budget: u64,
    /// Optional global cap on total oracle calls (f + g + mapping).
    pub max_oracle: Option<u64>,
}

impl Default for SuperConfig {
    fn default() -> Self {
        SuperConfig {
            eps: 1e-12,
            omega: 1.5,
            gamma: 0.5,
            eta_est0: 1.0,
            eta_lb: 0.1,
            q: 0.9,
            tau_max: 1e10,
            max_outer: 200,
            fallback_budget: 100_000,
            max_oracle: None,
        }
    }
}

impl SuperConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(SolverError::InvalidConfig(msg.into()));
        if !(self.eps > 0.0) {
            return bad("eps must be positive");
        }
        if !(self.omega > 1.0) {
            return bad("omega must exceed 1");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(self.omega * self.gamma < 1.0) {
            return bad("omega * gamma must be below 1");
        }
        if !(self.eta_est0 > 0.0 && self.eta_est0 <= 2.0) {
            return bad("eta_est0 must lie in (0, 2]");
        }
        if !(self.eta_lb > 0.0 && self.eta_lb <= self.eta_est0) {
            return bad("eta_lb must lie in (0, eta_est0]");
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return bad("q must lie in (0, 1)");
        }
        if !(self.tau_max > 0.0) {
            return bad("tau_max must be positive");
        }
        if self.max_outer == 0 || self.fallback_budget == 0 {
            return bad("iteration budgets must be at least 1");
        }
        Ok(())
    }
}

/// Exponent-estimate decay, applied when a bundle step was accepted without
/// triggering the superlinear-improvement stop: `max(eta_lb, q * eta_est)`.
pub fn update_eta(eta_est: f64, cfg: &SuperConfig) -> f64 {
    cfg.eta_lb.max(cfg.q * eta_est)
}

/// Summary of one outer iteration.
#[derive(Clone, Copy, Debug)]
pub struct OuterStep {
    pub gap_before: f64,
    pub gap_after: f64,
    /// Whether the bundle candidate was accepted (otherwise the fallback ran).
    pub accepted_bundle: bool,
    pub bundle_termination: BundleTermination,
}

/// Full result of a coupled solve.
#[derive(Clone, Debug)]
pub struct SolveReport {
    /// Best-gap point seen over the whole run.
    pub point: Vec<f64>,
    pub gap: f64,
    pub status: RunStatus,
    pub history: RunHistory,
    pub counter: OracleCounter,
    pub outer_steps: Vec<OuterStep>,
    pub initial_gap: f64,
    /// Exponent estimate at termination.
    pub eta_final: f64,
}

impl SolveReport {
    pub fn outer_iterations(&self) -> u64 {
        self.outer_steps.len() as u64
    }

    pub fn bundle_accepted(&self) -> u64 {
        self.outer_steps.iter().filter(|s| s.accepted_bundle).count() as u64
    }

    pub fn bundle_rejected(&self) -> u64 {
        self.outer_steps.iter().filter(|s| !s.accepted_bundle).count() as u64
    }
}

/// Runs the coupled solver from `x0` with the given fallback mapping.
///
/// Returns the best-gap point together with the full oracle-call trace.
/// Budget exhaustion is reported through the status; a full outer iteration
/// with no gap reduction reports `Stalled`.
pub fn run_superpolyak(
    oracle: &Oracle,
    fallback: &AlgorithmicMapping,
    x0: &[f64],
    cfg: &SuperConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    let mut counter = OracleCounter::new();
    let mut history = RunHistory::new();

    let mut x = x0.to_vec();
    let mut cur_gap = gap(oracle, &mut counter, &x)?;
    record(&mut history, &counter, cur_gap, StepKind::Init);
    let initial_gap = cur_gap;

    let mut best = x.clone();
    let mut best_gap = cur_gap;
    let mut eta_est = cfg.eta_est0;
    let mut outer_steps = Vec::new();
    let mut status = RunStatus::BudgetExhausted;

    for k in 0..cfg.max_outer {
        if cur_gap <= cfg.eps {
            status = RunStatus::Converged;
            break;
        }
        if let Some(cap) = cfg.max_oracle {
            if counter.total() >= cap {
                status = RunStatus::BudgetExhausted;
                break;
            }
        }

        let tau = cfg.omega.powi(k as i32 + 1).min(cfg.tau_max);
        let bundle_cfg = BundleConfig {
            tau,
            eta_est,
            max_steps: None,
            record_trail: false,
        };
        let outcome = run_bundle(oracle, &mut counter, &x, &bundle_cfg)?;

        let gap_before = cur_gap;
        let accepted = outcome.candidate.is_some() && outcome.best_gap < cfg.gamma * cur_gap;
        if accepted {
            x = outcome.candidate.expect("candidate checked above");
            cur_gap = outcome.best_gap;
            record(&mut history, &counter, cur_gap, StepKind::BundleAccepted);
            if outcome.termination != BundleTermination::SuperlinearHit {
                eta_est = update_eta(eta_est, cfg);
            }
            outer_steps.push(OuterStep {
                gap_before,
                gap_after: cur_gap,
                accepted_bundle: true,
                bundle_termination: outcome.termination,
            });
        } else {
            record(&mut history, &counter, cur_gap, StepKind::BundleRejected);
            let target = cfg.gamma * cur_gap;
            let fb = fallback_run(
                fallback,
                oracle,
                &mut counter,
                &x,
                target,
                cfg.fallback_budget,
                &mut history,
                Some(cur_gap),
            )?;
            outer_steps.push(OuterStep {
                gap_before,
                gap_after: fb.gap,
                accepted_bundle: false,
                bundle_termination: outcome.termination,
            });
            if fb.status == RunStatus::BudgetExhausted {
                if fb.gap < cur_gap {
                    x = fb.point;
                    cur_gap = fb.gap;
                    status = RunStatus::BudgetExhausted;
                } else {
                    status = RunStatus::Stalled;
                }
                if cur_gap < best_gap {
                    best_gap = cur_gap;
                    best = x.clone();
                }
                break;
            }
            x = fb.point;
            cur_gap = fb.gap;
        }

        if cur_gap < best_gap {
            best_gap = cur_gap;
            best = x.clone();
        }
    }

    if cur_gap <= cfg.eps {
        status = RunStatus::Converged;
    }

    Ok(SolveReport {
        point: best,
        gap: best_gap,
        status,
        history,
        counter,
        outer_steps,
        initial_gap,
        eta_final: eta_est,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fallbacks::polyak_map;
    use crate::oracle::Oracle;

    fn max_abs_oracle() -> Oracle {
        Oracle::new(
            2,
            0.0,
            |x| x[0].abs().max(x[1].abs()),
            |x| {
                if x[0].abs() >= x[1].abs() {
                    vec![if x[0] == 0.0 { 0.0 } else { x[0].signum() }, 0.0]
                } else {
                    vec![0.0, x[1].signum()]
                }
            },
        )
    }

    fn abs_oracle() -> Oracle {
        Oracle::new(
            1,
            0.0,
            |x| x[0].abs(),
            |x| vec![if x[0] == 0.0 { 0.0 } else { x[0].signum() }],
        )
    }

    #[test]
    fn eta_decay_values() {
        let cfg = SuperConfig::default();
        assert!((update_eta(1.0, &cfg) - 0.9).abs() < 1e-15);
        assert!((update_eta(0.1, &cfg) - 0.1).abs() < 1e-15);
        assert!((update_eta(0.2, &cfg) - 0.18).abs() < 1e-15);
    }

    #[test]
    fn omega_gamma_product_is_enforced() {
        let cfg = SuperConfig {
            omega: 2.0,
            gamma: 0.6,
            ..SuperConfig::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(SolverError::InvalidConfig(_))
        ));
    }

    #[test]
    fn max_abs_solved_in_one_outer_iteration_without_fallback() {
        let oracle = max_abs_oracle();
        let fallback = polyak_map();
        let cfg = SuperConfig::default();
        let report = run_superpolyak(&oracle, &fallback, &[1.0, 0.5], &cfg).unwrap();
        assert_eq!(report.status, RunStatus::Converged);
        assert!(report.gap.abs() <= 1e-15);
        assert!(report.point[0].abs() < 1e-15 && report.point[1].abs() < 1e-15);
        assert_eq!(report.outer_iterations(), 1);
        assert_eq!(report.counter.mapping_calls, 0);
        assert_eq!(report.bundle_accepted(), 1);
    }

    #[test]
    fn abs_bundle_candidate_accepted_immediately() {
        let oracle = abs_oracle();
        let fallback = polyak_map();
        let report =
            run_superpolyak(&oracle, &fallback, &[5.0], &SuperConfig::default()).unwrap();
        assert_eq!(report.status, RunStatus::Converged);
        assert_eq!(report.outer_iterations(), 1);
        assert_eq!(report.counter.mapping_calls, 0);
        assert_eq!(report.point, vec![0.0]);
    }

    #[test]
    fn per_step_gap_reduction_contract() {
        // Every outer step (accepted or fallback) multiplies the gap by at
        // most gamma, absent budget exhaustion.
        let oracle = max_abs_oracle();
        let fallback = polyak_map();
        let cfg = SuperConfig {
            eps: 1e-13,
            ..SuperConfig::default()
        };
        let report = run_superpolyak(&oracle, &fallback, &[0.9, -0.7], &cfg).unwrap();
        assert_eq!(report.status, RunStatus::Converged);
        for step in &report.outer_steps {
            assert!(
                step.gap_after <= cfg.gamma * step.gap_before + 1e-16,
                "step {step:?} violates the reduction contract"
            );
        }
    }

    #[test]
    fn history_totals_match_counter() {
        let oracle = max_abs_oracle();
        let fallback = polyak_map();
        let report =
            run_superpolyak(&oracle, &fallback, &[0.3, 1.1], &SuperConfig::default()).unwrap();
        let records = report.history.records();
        assert!(!records.is_empty());
        assert_eq!(records.last().unwrap().oracle_calls, report.counter.total());
        for pair in records.windows(2) {
            assert!(pair[1].oracle_calls > pair[0].oracle_calls);
        }
    }

    #[test]
    fn identity_fallback_reports_stall() {
        // Oracle whose bundle step cannot improve: f is constant 1 away from
        // a gradient that points nowhere useful, and the fallback is the
        // identity, so one full outer iteration makes no progress.
        let oracle = Oracle::new(1, 0.0, |x| 1.0 + x[0].abs(), |_| vec![1e-3]);
        let fallback = crate::fallbacks::fixed_point_map(|x: &[f64]| x.to_vec());
        let cfg = SuperConfig {
            fallback_budget: 10,
            max_outer: 5,
            ..SuperConfig::default()
        };
        let report = run_superpolyak(&oracle, &fallback, &[0.5], &cfg).unwrap();
        assert_eq!(report.status, RunStatus::Stalled);
    }
}
