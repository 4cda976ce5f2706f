//! Random polyhedral instances: a maximum of affine pieces that all touch
//! at a planted point.
//!
//! With pieces `a_1, ..., a_k` satisfying `0 = sum_j c_j a_j` for positive
//! weights `c_j`, the function `f(x) = max_j <a_j, x - x_bar>` has optimal
//! value 0 attained on the affine set `x_bar + span(a_j)^perp`, grows
//! sharply across it, and its linearizations at nearby points vanish on the
//! solution set exactly. Bundle steps are therefore exact on this family,
//! which makes it the reference workload for finite-termination tests.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;

use super::{gaussian_vec, instance_rng, start_at_relative_distance, unit_vec};
use crate::error::{Result, SolverError};
use crate::oracle::Oracle;
use crate::qr_bundle::dot;

struct MaData {
    /// Piece gradients, one row per piece.
    pieces: Vec<Vec<f64>>,
    /// Piece offsets making every piece active at the planted point.
    offsets: Vec<f64>,
    planted: Vec<f64>,
}

/// A generated max-affine instance.
#[derive(Clone)]
pub struct MaxAffineInstance {
    pub d: usize,
    pub pieces: usize,
    data: Arc<MaData>,
}

impl MaxAffineInstance {
    pub fn planted_point(&self) -> Vec<f64> {
        self.data.planted.clone()
    }

    pub fn piece_gradients(&self) -> &[Vec<f64>] {
        &self.data.pieces
    }

    /// Start point with `||x0 - x_bar|| = relative * ||x_bar||`.
    pub fn initial_point(&self, rng: &mut ChaCha8Rng, relative: f64) -> Vec<f64> {
        start_at_relative_distance(rng, &self.data.planted, relative)
    }
}

/// Generates a max-affine instance with `pieces <= d` pieces, all active at
/// a planted point of norm `scale`. The lowest-index maximizing piece is the
/// gradient selection.
pub fn gen_max_affine(
    d: usize,
    pieces: usize,
    scale: f64,
    seed: u64,
) -> Result<(Oracle, MaxAffineInstance)> {
    if d == 0 || pieces < 2 || pieces > d {
        return Err(SolverError::InvalidConfig(
            "max-affine requires 2 <= pieces <= d".into(),
        ));
    }
    if !(scale > 0.0) {
        return Err(SolverError::InvalidConfig("scale must be positive".into()));
    }
    let mut rng = instance_rng(seed);

    let mut grads: Vec<Vec<f64>> = (0..pieces - 1).map(|_| gaussian_vec(&mut rng, d)).collect();
    let weights: Vec<f64> = (0..pieces)
        .map(|_| rng.sample::<f64, _>(StandardNormal).abs() + 0.1)
        .collect();
    // Last piece closes the positive combination: sum_j c_j a_j = 0, which
    // puts 0 in the relative interior of the convex hull of the pieces.
    let mut last = vec![0.0; d];
    for (j, g) in grads.iter().enumerate() {
        for (l, gi) in last.iter_mut().zip(g) {
            *l -= weights[j] * gi;
        }
    }
    for l in last.iter_mut() {
        *l /= weights[pieces - 1];
    }
    grads.push(last);

    let planted: Vec<f64> = unit_vec(&mut rng, d).into_iter().map(|v| v * scale).collect();
    let offsets: Vec<f64> = grads.iter().map(|g| -dot(g, &planted)).collect();

    let data = Arc::new(MaData {
        pieces: grads,
        offsets,
        planted,
    });

    let f_data = Arc::clone(&data);
    let g_data = Arc::clone(&data);
    let oracle = Oracle::new(
        d,
        0.0,
        move |x: &[f64]| {
            f_data
                .pieces
                .iter()
                .zip(&f_data.offsets)
                .map(|(a, b)| dot(a, x) + b)
                .fold(f64::NEG_INFINITY, f64::max)
        },
        move |x: &[f64]| {
            let mut best = 0;
            let mut best_val = f64::NEG_INFINITY;
            for (j, (a, b)) in g_data.pieces.iter().zip(&g_data.offsets).enumerate() {
                let val = dot(a, x) + b;
                if val > best_val {
                    best_val = val;
                    best = j;
                }
            }
            g_data.pieces[best].clone()
        },
    );

    let instance = MaxAffineInstance {
        d,
        pieces,
        data,
    };
    Ok((oracle, instance))
}
