//! Phase retrieval as a two-set feasibility problem over the measurement
//! space.
//!
//! For a complex Gaussian matrix `A` and planted unit signal `x`, the sets
//! are the magnitude torus `Y1 = { u : |u| = |A x| }` and the range
//! `Y2 = range(A)`. The objective is the sum of distances to the two sets;
//! the gradient selection uses the distance-function subgradient
//! `(u - P(u)) / dist(u, P)` off each set and 0 on it. Complex vectors are
//! stored as interleaved real pairs `(re_0, im_0, re_1, im_1, ...)`.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use super::{gaussian_vec, instance_rng, start_at_relative_distance};
use crate::error::{Result, SolverError};
use crate::fallbacks::{alternating_projection_map, AlgorithmicMapping};
use crate::oracle::Oracle;

struct PrData {
    m: usize,
    /// Real 2m x 2d representation of the complex measurement matrix.
    a_real: DMatrix<f64>,
    /// Orthonormal basis of `range(A)` as a real subspace of `R^(2m)`.
    basis: DMatrix<f64>,
    /// Measured magnitudes (length m).
    magnitudes: Vec<f64>,
    /// Planted feasible point `A x` (interleaved, length 2m).
    planted: Vec<f64>,
    /// Planted signal (interleaved, length 2d).
    signal: Vec<f64>,
}

impl PrData {
    fn proj_range(&self, u: &[f64]) -> Vec<f64> {
        let uv = DVector::from_column_slice(u);
        let coeffs = self.basis.transpose() * &uv;
        (&self.basis * coeffs).as_slice().to_vec()
    }
}

/// Componentwise projection onto the magnitude torus `{ u : |u| = y }`:
/// `u_k <- y_k * u_k / |u_k|`, with the phase-one convention `(y_k, 0)`
/// when `|u_k|` underflows.
pub fn proj_magnitude(u: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(u.len(), 2 * y.len(), "interleaved complex length mismatch");
    let mut out = Vec::with_capacity(u.len());
    for (k, &mag) in y.iter().enumerate() {
        let re = u[2 * k];
        let im = u[2 * k + 1];
        let norm = re.hypot(im);
        if norm <= 1e-300 {
            out.push(mag);
            out.push(0.0);
        } else {
            out.push(mag * re / norm);
            out.push(mag * im / norm);
        }
    }
    out
}

/// A generated phase-retrieval instance.
#[derive(Clone)]
pub struct PhaseRetrievalInstance {
    pub d: usize,
    pub m: usize,
    data: Arc<PrData>,
}

impl PhaseRetrievalInstance {
    /// The planted feasible point `A x` (interleaved, length 2m).
    pub fn planted_point(&self) -> Vec<f64> {
        self.data.planted.clone()
    }

    /// The planted signal on the complex unit sphere (interleaved, 2d).
    pub fn planted_signal(&self) -> Vec<f64> {
        self.data.signal.clone()
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.data.magnitudes
    }

    /// Distance of `u` to the range of the measurement matrix.
    pub fn dist_to_range(&self, u: &[f64]) -> f64 {
        let p = self.data.proj_range(u);
        norm_diff(u, &p)
    }

    /// Projection of `u` onto the magnitude torus.
    pub fn proj_torus(&self, u: &[f64]) -> Vec<f64> {
        proj_magnitude(u, &self.data.magnitudes)
    }

    /// Projection of `u` onto the range of the measurement matrix.
    pub fn proj_range(&self, u: &[f64]) -> Vec<f64> {
        self.data.proj_range(u)
    }

    /// Real representation of the measurement matrix (2m x 2d).
    pub fn measurement_matrix(&self) -> &DMatrix<f64> {
        &self.data.a_real
    }

    pub fn initial_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        start_at_relative_distance(rng, &self.data.planted, 1.0)
    }
}

/// Generates a phase-retrieval instance: the oracle over `R^(2m)`, the
/// instance data, and the alternating-projection mapping `P_range . P_torus`.
pub fn gen_phase_retrieval(
    d: usize,
    m: usize,
    seed: u64,
) -> Result<(Oracle, PhaseRetrievalInstance, AlgorithmicMapping)> {
    if d == 0 || m < d {
        return Err(SolverError::InvalidConfig(
            "phase retrieval requires m >= d >= 1".into(),
        ));
    }
    let mut rng = instance_rng(seed);

    // Complex Gaussian A as its real 2m x 2d representation: the complex
    // entry p + iq contributes [[p, -q], [q, p]].
    let mut a_real = DMatrix::zeros(2 * m, 2 * d);
    for k in 0..m {
        for j in 0..d {
            let p: f64 = {
                use rand::Rng;
                rng.sample(rand_distr::StandardNormal)
            };
            let q: f64 = {
                use rand::Rng;
                rng.sample(rand_distr::StandardNormal)
            };
            a_real[(2 * k, 2 * j)] = p;
            a_real[(2 * k, 2 * j + 1)] = -q;
            a_real[(2 * k + 1, 2 * j)] = q;
            a_real[(2 * k + 1, 2 * j + 1)] = p;
        }
    }

    let signal = {
        let raw = gaussian_vec(&mut rng, 2 * d);
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        raw.into_iter().map(|x| x / norm).collect::<Vec<f64>>()
    };
    let planted = (&a_real * DVector::from_column_slice(&signal))
        .as_slice()
        .to_vec();
    let magnitudes: Vec<f64> = (0..m)
        .map(|k| planted[2 * k].hypot(planted[2 * k + 1]))
        .collect();

    let basis = a_real.clone().qr().q();

    let data = Arc::new(PrData {
        m,
        a_real,
        basis,
        magnitudes,
        planted,
        signal,
    });

    let f_data = Arc::clone(&data);
    let g_data = Arc::clone(&data);
    let oracle = Oracle::new(
        2 * m,
        0.0,
        move |u: &[f64]| {
            let p1 = proj_magnitude(u, &f_data.magnitudes);
            let p2 = f_data.proj_range(u);
            norm_diff(u, &p1) + norm_diff(u, &p2)
        },
        move |u: &[f64]| {
            let mut grad = vec![0.0; 2 * g_data.m];
            add_distance_subgradient(&mut grad, u, &proj_magnitude(u, &g_data.magnitudes));
            add_distance_subgradient(&mut grad, u, &g_data.proj_range(u));
            grad
        },
    );

    let ap_data = Arc::clone(&data);
    let mapping = alternating_projection_map(
        move |u: &[f64]| proj_magnitude(u, &ap_data.magnitudes),
        {
            let range_data = Arc::clone(&data);
            move |u: &[f64]| range_data.proj_range(u)
        },
    );

    let instance = PhaseRetrievalInstance { d, m, data };
    Ok((oracle, instance, mapping))
}

fn norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Adds `(u - proj) / ||u - proj||` to `grad` when `u` is off the set; on
/// the set the zero vector is the selected subgradient.
fn add_distance_subgradient(grad: &mut [f64], u: &[f64], proj: &[f64]) {
    let dist = norm_diff(u, proj);
    if dist > 1e-300 {
        for i in 0..grad.len() {
            grad[i] += (u[i] - proj[i]) / dist;
        }
    }
}
