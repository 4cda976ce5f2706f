//! Algorithmic mappings and the fallback iteration loop.
//!
//! An algorithmic mapping is a single-step map `x -> A(x)` that contracts
//! toward the solution set in a neighborhood. Iterating one until the
//! function gap drops below a target is the linearly convergent fallback
//! used by the coupled driver, and doubles as the first-order baseline in
//! the benchmark harness (fixed-point iteration, alternating projections,
//! or the Polyak step itself).

use std::sync::Arc;

use crate::error::Result;
use crate::oracle::{gap, record, Oracle, OracleCounter, RunHistory, StepKind};
use crate::polyak_sgm::{polyak_step_with_gap, RunStatus};

type ApplyFn =
    dyn Fn(&Oracle, &mut OracleCounter, &[f64], Option<f64>) -> Result<Vec<f64>> + Send + Sync;

/// A single-step fallback map together with its oracle accounting weight.
///
/// Mappings are immutable and shareable across runs. Applying one counts
/// `calls_per_apply` mapping calls; any `f`/`g` evaluations a mapping makes
/// internally (e.g. the Polyak-step mapping) are counted on top through the
/// oracle.
#[derive(Clone)]
pub struct AlgorithmicMapping {
    apply: Arc<ApplyFn>,
    calls_per_apply: u64,
}

impl AlgorithmicMapping {
    pub fn new<F>(apply: F, calls_per_apply: u64) -> Self
    where
        F: Fn(&Oracle, &mut OracleCounter, &[f64], Option<f64>) -> Result<Vec<f64>>
            + Send
            + Sync
            + 'static,
    {
        AlgorithmicMapping {
            apply: Arc::new(apply),
            calls_per_apply,
        }
    }

    pub fn calls_per_apply(&self) -> u64 {
        self.calls_per_apply
    }

    /// Applies the mapping once. `known_gap` lets callers that already
    /// evaluated `f(x)` avoid a duplicate evaluation inside gap-dependent
    /// mappings.
    pub fn apply(
        &self,
        oracle: &Oracle,
        counter: &mut OracleCounter,
        x: &[f64],
        known_gap: Option<f64>,
    ) -> Result<Vec<f64>> {
        counter.mapping_calls += self.calls_per_apply;
        (self.apply)(oracle, counter, x, known_gap)
    }
}

/// Fixed-point iteration mapping `x -> T(x)`.
pub fn fixed_point_map<T>(t: T) -> AlgorithmicMapping
where
    T: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
{
    AlgorithmicMapping::new(move |_, _, x, _| Ok(t(x)), 1)
}

/// Alternating projections `x -> P2(P1(x))`, counted as one mapping
/// evaluation per composite application.
pub fn alternating_projection_map<P1, P2>(p1: P1, p2: P2) -> AlgorithmicMapping
where
    P1: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    P2: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
{
    AlgorithmicMapping::new(move |_, _, x, _| Ok(p2(&p1(x))), 1)
}

/// The Polyak subgradient step as an algorithmic mapping. Each application
/// evaluates `g` once (plus `f` when the gap is not supplied).
pub fn polyak_map() -> AlgorithmicMapping {
    AlgorithmicMapping::new(
        |oracle, counter, x, known_gap| {
            let g = match known_gap {
                Some(g) => g,
                None => gap(oracle, counter, x)?,
            };
            polyak_step_with_gap(oracle, counter, x, g)
        },
        1,
    )
}

/// Result of [`fallback_run`].
#[derive(Clone, Debug)]
pub struct FallbackResult {
    pub point: Vec<f64>,
    pub gap: f64,
    pub status: RunStatus,
    pub applications: u64,
}

/// Iterates `z <- A(z)` until `gap(z) <= target_gap`, recording one history
/// entry per application. On budget exhaustion the best-gap iterate seen is
/// returned with a `BudgetExhausted` status; budgets are mandatory because
/// the contraction contract only holds locally and a bad start can stall.
#[allow(clippy::too_many_arguments)]
pub fn fallback_run(
    map: &AlgorithmicMapping,
    oracle: &Oracle,
    counter: &mut OracleCounter,
    z0: &[f64],
    target_gap: f64,
    budget: u64,
    history: &mut RunHistory,
    known_gap: Option<f64>,
) -> Result<FallbackResult> {
    let mut z = z0.to_vec();
    let mut cur_gap = known_gap;
    let mut best: Option<(Vec<f64>, f64)> = None;

    for applications in 1..=budget {
        let next = map.apply(oracle, counter, &z, cur_gap)?;
        z = next;
        let g = gap(oracle, counter, &z)?;
        record(history, counter, g, StepKind::Fallback);
        cur_gap = Some(g);
        if best.as_ref().is_none_or(|(_, bg)| g < *bg) {
            best = Some((z.clone(), g));
        }
        if g <= target_gap {
            return Ok(FallbackResult {
                point: z,
                gap: g,
                status: RunStatus::Converged,
                applications,
            });
        }
    }

    let (point, best_gap) = best.unwrap_or((z, f64::INFINITY));
    Ok(FallbackResult {
        point,
        gap: best_gap,
        status: RunStatus::BudgetExhausted,
        applications: budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Oracle;

    fn abs_oracle() -> Oracle {
        Oracle::new(
            1,
            0.0,
            |x| x[0].abs(),
            |x| vec![if x[0] == 0.0 { 0.0 } else { x[0].signum() }],
        )
    }

    #[test]
    fn halving_map_reaches_target() {
        let oracle = abs_oracle();
        let map = fixed_point_map(|x: &[f64]| x.iter().map(|v| v / 2.0).collect());
        let mut counter = OracleCounter::new();
        let mut history = RunHistory::new();
        let out = fallback_run(
            &map,
            &oracle,
            &mut counter,
            &[8.0],
            1.0,
            100,
            &mut history,
            None,
        )
        .unwrap();
        assert_eq!(out.status, RunStatus::Converged);
        assert_eq!(out.point, vec![1.0]);
        assert_eq!(out.applications, 3);
        assert_eq!(counter.mapping_calls, 3);
        assert_eq!(counter.f_calls, 3);
    }

    #[test]
    fn polyak_map_solves_abs_in_one_application() {
        let oracle = abs_oracle();
        let map = polyak_map();
        let mut counter = OracleCounter::new();
        let mut history = RunHistory::new();
        let out = fallback_run(
            &map,
            &oracle,
            &mut counter,
            &[5.0],
            1e-12,
            100,
            &mut history,
            None,
        )
        .unwrap();
        assert_eq!(out.status, RunStatus::Converged);
        assert_eq!(out.point, vec![0.0]);
        assert_eq!(out.applications, 1);
        assert_eq!(counter.g_calls, 1);
    }

    #[test]
    fn axis_projections_reach_origin() {
        let oracle = Oracle::new(
            2,
            0.0,
            |x| x[1].abs() + x[0].abs(),
            |x| x.iter().map(|v| v.signum()).collect(),
        );
        // X1 = x-axis, X2 = y-axis.
        let map = alternating_projection_map(
            |x: &[f64]| vec![x[0], 0.0],
            |x: &[f64]| vec![0.0, x[1]],
        );
        let mut counter = OracleCounter::new();
        let step = map.apply(&oracle, &mut counter, &[1.0, 1.0], None).unwrap();
        assert_eq!(step, vec![0.0, 0.0]);
        assert_eq!(counter.mapping_calls, 1);
    }

    #[test]
    fn sphere_projection_fixed_point() {
        let oracle = Oracle::new(2, 0.0, |_| 0.0, |_| vec![0.0, 0.0]);
        let project = |x: &[f64]| {
            let n = (x[0] * x[0] + x[1] * x[1]).sqrt();
            vec![x[0] / n, x[1] / n]
        };
        let map = alternating_projection_map(project, project);
        let mut counter = OracleCounter::new();
        let out = map.apply(&oracle, &mut counter, &[2.0, 0.0], None).unwrap();
        assert_eq!(out, vec![1.0, 0.0]);
    }

    #[test]
    fn identity_map_exhausts_budget() {
        let oracle = abs_oracle();
        let map = fixed_point_map(|x: &[f64]| x.to_vec());
        let mut counter = OracleCounter::new();
        let mut history = RunHistory::new();
        let out = fallback_run(
            &map,
            &oracle,
            &mut counter,
            &[1.0],
            1e-12,
            25,
            &mut history,
            None,
        )
        .unwrap();
        assert_eq!(out.status, RunStatus::BudgetExhausted);
        assert_eq!(out.applications, 25);
        assert_eq!(out.point, vec![1.0]);
    }
}
