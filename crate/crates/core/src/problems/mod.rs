//! Seeded problem generators for the benchmark families, plus small toy
//! oracles used throughout the tests.
//!
//! Every generator draws its data from a stream of a counter-based RNG
//! seeded by a single 64-bit seed: stream 0 for the instance, stream 1 for
//! the initializer. Instance and start point are therefore independently
//! reproducible from `(seed, parameters)` alone.

pub mod compressed_sensing;
pub mod matrix_sensing;
pub mod max_affine;
pub mod max_linear;
pub mod phase_retrieval;
pub mod toys;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use compressed_sensing::{
    gen_compressed_sensing, gen_compressed_sensing_with, soft_threshold,
    CompressedSensingInstance,
};
pub use matrix_sensing::{gen_matrix_sensing, Ensemble, MatrixSensingInstance};
pub use max_affine::{gen_max_affine, MaxAffineInstance};
pub use max_linear::{gen_max_linear, MaxLinearInstance};
pub use phase_retrieval::{gen_phase_retrieval, proj_magnitude, PhaseRetrievalInstance};

/// RNG stream for instance data.
pub fn instance_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

/// RNG stream for the solver start point.
pub fn init_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

pub(crate) fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Uniform direction on the unit sphere of `R^n`.
pub(crate) fn unit_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vec(rng, n);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Start point at relative distance 1 from `anchor`:
/// `anchor + ||anchor|| * u` with `u` uniform on the sphere.
pub(crate) fn start_at_relative_distance(
    rng: &mut ChaCha8Rng,
    anchor: &[f64],
    relative: f64,
) -> Vec<f64> {
    let norm = anchor.iter().map(|x| x * x).sum::<f64>().sqrt();
    let u = unit_vec(rng, anchor.len());
    anchor
        .iter()
        .zip(u)
        .map(|(a, d)| a + relative * norm * d)
        .collect()
}

/// Self-describing dump of a generated instance: the seed and parameters
/// regenerate it exactly; both are stored for audit.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "problem", rename_all = "snake_case")]
pub enum ProblemSpec {
    MatrixSensing {
        d: usize,
        r: usize,
        m: usize,
        kappa_tilde: f64,
        ensemble: Ensemble,
        seed: u64,
    },
    MaxLinear {
        d: usize,
        r: usize,
        m: usize,
        seed: u64,
    },
    PhaseRetrieval {
        d: usize,
        m: usize,
        seed: u64,
    },
    CompressedSensing {
        d: usize,
        m: usize,
        s: usize,
        lambda: Option<f64>,
        literal_prox: bool,
        seed: u64,
    },
}

impl ProblemSpec {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
