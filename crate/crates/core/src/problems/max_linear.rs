//! Max-linear regression: recover vertices `b_1, ..., b_r` from noiseless
//! evaluations `y_i = max_j <b_j, a_i>` of the support function of their
//! convex hull, by minimizing the mean absolute residual.

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use super::{instance_rng, start_at_relative_distance, unit_vec};
use crate::error::{Result, SolverError};
use crate::oracle::Oracle;

struct MlData {
    d: usize,
    r: usize,
    m: usize,
    /// Measurement vectors, one row per sample.
    a: DMatrix<f64>,
    targets: Vec<f64>,
    planted: Vec<f64>,
}

impl MlData {
    /// Per-sample scores `<b_j, a_i>` (m x r) for stacked column-major betas.
    fn scores(&self, x: &[f64]) -> DMatrix<f64> {
        let beta = DMatrix::from_column_slice(self.d, self.r, x);
        &self.a * beta
    }
}

/// A generated max-linear regression instance.
#[derive(Clone)]
pub struct MaxLinearInstance {
    pub d: usize,
    pub r: usize,
    pub m: usize,
    data: Arc<MlData>,
}

impl MaxLinearInstance {
    /// Planted vertices stacked column-major as the oracle's variable.
    pub fn planted_point(&self) -> Vec<f64> {
        self.data.planted.clone()
    }

    pub fn initial_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        start_at_relative_distance(rng, &self.data.planted, 1.0)
    }
}

/// Generates a max-linear instance over `R^(dr)`. Gaussian samples `a_i`,
/// planted vertices uniform on the unit sphere. Per sample, the gradient
/// selection takes the lowest maximizing index and `sign(0) = 0`.
pub fn gen_max_linear(
    d: usize,
    r: usize,
    m: usize,
    seed: u64,
) -> Result<(Oracle, MaxLinearInstance)> {
    if d == 0 || r == 0 || m == 0 {
        return Err(SolverError::InvalidConfig(
            "max-linear requires positive d, r, m".into(),
        ));
    }
    let mut rng = instance_rng(seed);
    let a = DMatrix::from_fn(m, d, |_, _| {
        use rand::Rng;
        rng.sample(rand_distr::StandardNormal)
    });
    let mut planted = Vec::with_capacity(d * r);
    for _ in 0..r {
        planted.extend(unit_vec(&mut rng, d));
    }

    let mut data = MlData {
        d,
        r,
        m,
        a,
        targets: Vec::new(),
        planted: planted.clone(),
    };
    let scores = data.scores(&planted);
    data.targets = (0..m)
        .map(|i| (0..r).map(|j| scores[(i, j)]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let data = Arc::new(data);

    let f_data = Arc::clone(&data);
    let g_data = Arc::clone(&data);
    let oracle = Oracle::new(
        d * r,
        0.0,
        move |x: &[f64]| {
            let scores = f_data.scores(x);
            (0..f_data.m)
                .map(|i| {
                    let best = (0..f_data.r)
                        .map(|j| scores[(i, j)])
                        .fold(f64::NEG_INFINITY, f64::max);
                    (f_data.targets[i] - best).abs()
                })
                .sum::<f64>()
                / f_data.m as f64
        },
        move |x: &[f64]| {
            let scores = g_data.scores(x);
            let scale = 1.0 / g_data.m as f64;
            let mut grad = vec![0.0; g_data.d * g_data.r];
            for i in 0..g_data.m {
                let mut best_j = 0;
                let mut best = f64::NEG_INFINITY;
                for j in 0..g_data.r {
                    if scores[(i, j)] > best {
                        best = scores[(i, j)];
                        best_j = j;
                    }
                }
                let resid = g_data.targets[i] - best;
                if resid == 0.0 {
                    continue;
                }
                // d/d beta_{j*} of |y_i - max| = -sign(y_i - max) * a_i.
                let s = -resid.signum() * scale;
                for k in 0..g_data.d {
                    grad[best_j * g_data.d + k] += s * g_data.a[(i, k)];
                }
            }
            grad
        },
    );

    let instance = MaxLinearInstance { d, r, m, data };
    Ok((oracle, instance))
}
