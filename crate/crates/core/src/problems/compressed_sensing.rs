//! Compressed sensing through the fixed points of the proximal gradient
//! map of the l1-penalized least-squares problem.
//!
//! For `h(x) = 0.5 ||A x - y||^2 + lambda ||x||_1` the forward-backward map
//! is `T(x) = soft_threshold(x - tau A^T (A x - y), tau * lambda)`; its
//! fixed points minimize `h`. The solved objective is the residual norm
//! `f(x) = ||x - T(x)||` with `f* = 0`, whose gradient selection is
//! `(I - J)^T F(x) / ||F(x)||` for the Clarke-Jacobian selection `J` of `T`
//! (active coordinates strictly above the threshold; boundary treated as
//! inactive). A `literal_prox` switch reproduces the plain `lambda`
//! threshold instead of `tau * lambda`.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use std::sync::Arc;

use super::{gaussian_vec, instance_rng};
use crate::error::{Result, SolverError};
use crate::fallbacks::{fixed_point_map, AlgorithmicMapping};
use crate::oracle::Oracle;

/// Componentwise soft threshold: `sign(x_i) * max(|x_i| - t, 0)`.
pub fn soft_threshold(x: &[f64], t: f64) -> Vec<f64> {
    assert!(t >= 0.0, "threshold must be nonnegative");
    x.iter()
        .map(|&v| v.signum() * (v.abs() - t).max(0.0))
        .collect()
}

struct CsData {
    a: DMatrix<f64>,
    y: DVector<f64>,
    lambda: f64,
    tau: f64,
    threshold: f64,
    planted: Vec<f64>,
}

impl CsData {
    /// Inner affine point `x - tau A^T (A x - y)`.
    fn inner(&self, x: &[f64]) -> Vec<f64> {
        let xv = DVector::from_column_slice(x);
        let resid = &self.a * &xv - &self.y;
        let pull = self.a.transpose() * resid;
        x.iter()
            .zip(pull.iter())
            .map(|(xi, pi)| xi - self.tau * pi)
            .collect()
    }

    fn t_apply(&self, x: &[f64]) -> Vec<f64> {
        soft_threshold(&self.inner(x), self.threshold)
    }
}

/// A generated compressed-sensing instance.
#[derive(Clone)]
pub struct CompressedSensingInstance {
    pub d: usize,
    pub m: usize,
    pub s: usize,
    pub lambda: f64,
    pub tau: f64,
    pub literal_prox: bool,
    /// Fixed point of the proximal gradient map, computed at generation.
    x_star: Vec<f64>,
    data: Arc<CsData>,
}

impl CompressedSensingInstance {
    /// The stored fixed point of `T` (the instance's minimizer of `f`).
    pub fn fixed_point(&self) -> Vec<f64> {
        self.x_star.clone()
    }

    /// The planted sparse vector behind the measurements.
    pub fn planted_signal(&self) -> Vec<f64> {
        self.data.planted.clone()
    }

    /// One application of the proximal gradient map.
    pub fn prox_gradient_step(&self, x: &[f64]) -> Vec<f64> {
        self.data.t_apply(x)
    }

    /// Solver start convention for this family: the zero vector.
    pub fn initial_point(&self) -> Vec<f64> {
        vec![0.0; self.d]
    }
}

/// Generates a compressed-sensing instance: the oracle over `R^d`, the
/// instance, and the proximal-gradient fixed-point mapping.
///
/// `lambda = None` picks `0.1 * ||A^T y||_inf`, a scale-free default that
/// keeps the penalty active without drowning the signal.
pub fn gen_compressed_sensing(
    d: usize,
    m: usize,
    s: usize,
    lambda: Option<f64>,
    seed: u64,
) -> Result<(Oracle, CompressedSensingInstance, AlgorithmicMapping)> {
    gen_compressed_sensing_with(d, m, s, lambda, seed, false)
}

/// As [`gen_compressed_sensing`], with the literal prox threshold `lambda`
/// in place of `tau * lambda`.
pub fn gen_compressed_sensing_with(
    d: usize,
    m: usize,
    s: usize,
    lambda: Option<f64>,
    seed: u64,
    literal_prox: bool,
) -> Result<(Oracle, CompressedSensingInstance, AlgorithmicMapping)> {
    if s == 0 || s > m || m > d {
        return Err(SolverError::InvalidConfig(
            "compressed sensing requires 1 <= s <= m <= d".into(),
        ));
    }
    if let Some(l) = lambda {
        if !(l > 0.0) {
            return Err(SolverError::InvalidConfig("lambda must be positive".into()));
        }
    }
    let mut rng = instance_rng(seed);

    let a = DMatrix::from_fn(m, d, |_, _| {
        use rand::Rng;
        rng.sample(rand_distr::StandardNormal)
    });
    let mut planted = vec![0.0; d];
    let support = sample(&mut rng, d, s);
    let values = gaussian_vec(&mut rng, s);
    for (idx, val) in support.iter().zip(values) {
        planted[idx] = val;
    }
    let y = &a * DVector::from_column_slice(&planted);

    let sigma_max = a
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max);
    let tau = 0.95 / (sigma_max * sigma_max);
    let lambda = lambda.unwrap_or_else(|| {
        let aty: DVector<f64> = a.transpose() * &y;
        0.1 * aty.iter().map(|v| v.abs()).fold(0.0, f64::max)
    });
    let threshold = if literal_prox { lambda } else { tau * lambda };

    let data = Arc::new(CsData {
        a,
        y,
        lambda,
        tau,
        threshold,
        planted,
    });

    // Fixed point of T, iterated to near machine precision.
    let mut x_star = vec![0.0; d];
    let mut residual = f64::INFINITY;
    for _ in 0..500_000 {
        let next = data.t_apply(&x_star);
        residual = x_star
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        x_star = next;
        if residual <= 1e-14 {
            break;
        }
    }
    if residual > 1e-12 {
        return Err(SolverError::InvalidConfig(format!(
            "prox-gradient fixed point did not settle (residual {residual:.3e}); \
             the instance is too ill-conditioned for a reference fixed point"
        )));
    }

    let f_data = Arc::clone(&data);
    let g_data = Arc::clone(&data);
    let oracle = Oracle::new(
        d,
        0.0,
        move |x: &[f64]| {
            let tx = f_data.t_apply(x);
            x.iter()
                .zip(&tx)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        },
        move |x: &[f64]| {
            let inner = g_data.inner(x);
            let tx = soft_threshold(&inner, g_data.threshold);
            let fvec: Vec<f64> = x.iter().zip(&tx).map(|(a, b)| a - b).collect();
            let fnorm = fvec.iter().map(|v| v * v).sum::<f64>().sqrt();
            if fnorm <= 1e-300 {
                return vec![0.0; x.len()];
            }
            let w: Vec<f64> = fvec.iter().map(|v| v / fnorm).collect();
            // (I - J)^T w = w - (I - tau A^T A)(D w), D the active set of
            // the threshold (boundary counts as inactive).
            let dw: Vec<f64> = inner
                .iter()
                .zip(&w)
                .map(|(u, wi)| {
                    if u.abs() > g_data.threshold {
                        *wi
                    } else {
                        0.0
                    }
                })
                .collect();
            let dwv = DVector::from_column_slice(&dw);
            let pull = g_data.a.transpose() * (&g_data.a * &dwv);
            w.iter()
                .zip(dw.iter().zip(pull.iter()))
                .map(|(wi, (dwi, pi))| wi - (dwi - g_data.tau * pi))
                .collect()
        },
    );

    let map_data = Arc::clone(&data);
    let mapping = fixed_point_map(move |x: &[f64]| map_data.t_apply(x));

    let instance = CompressedSensingInstance {
        d,
        m,
        s,
        lambda: data.lambda,
        tau: data.tau,
        literal_prox,
        x_star,
        data,
    };
    Ok((oracle, instance, mapping))
}
