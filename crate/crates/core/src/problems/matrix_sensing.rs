//! Low-rank matrix sensing with an l1 residual loss.
//!
//! Measurements are bilinear probes `<l_i, M r_i>` of a planted rank-`r`
//! matrix `M = U V^T` with prescribed condition number. The objective over
//! stacked factors `(U, V)` is `(1/m) * sum_i |<l_i, U V^T r_i> - y_i|` and
//! the gradient selection follows the formal chain rule with `sign(0) = 0`.
//!
//! Two measurement ensembles are supported: dense i.i.d. Gaussian probes,
//! and a randomized Hadamard ensemble whose probes are rows of `H D_k` for
//! Rademacher sign patterns `D_k`, applied through fast Walsh-Hadamard
//! transforms.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use std::sync::Arc;

use super::{instance_rng, start_at_relative_distance};
use crate::error::{Result, SolverError};
use crate::oracle::Oracle;

/// Measurement ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    Gaussian,
    Hadamard,
}

impl FromStr for Ensemble {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Ensemble::Gaussian),
            "hadamard" => Ok(Ensemble::Hadamard),
            other => Err(SolverError::InvalidConfig(format!(
                "unknown ensemble '{other}' (expected gaussian or hadamard)"
            ))),
        }
    }
}

enum Measurements {
    /// Dense probe matrices, one row per measurement.
    Gaussian { left: DMatrix<f64>, right: DMatrix<f64> },
    /// Per-block Rademacher sign patterns; probe `i` is row `i mod d` of
    /// `H D_k` with `k = i / d`.
    Hadamard {
        left_signs: Vec<Vec<f64>>,
        right_signs: Vec<Vec<f64>>,
    },
}

struct MsData {
    d: usize,
    r: usize,
    m: usize,
    measurements: Measurements,
    targets: Vec<f64>,
    planted: Vec<f64>,
    singular_values: Vec<f64>,
}

impl MsData {
    /// Applies all measurements to the factor pair: `z_i = <l_i, U V^T r_i>`.
    /// Returns per-measurement values together with the probe images
    /// `(l_i^T U, r_i^T V)` needed by the gradient.
    fn forward(&self, u: &DMatrix<f64>, v: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
        match &self.measurements {
            Measurements::Gaussian { left, right } => {
                let p = left * u; // m x r
                let q = right * v; // m x r
                let z = (0..self.m)
                    .map(|i| (0..self.r).map(|t| p[(i, t)] * q[(i, t)]).sum())
                    .collect();
                (z, p, q)
            }
            Measurements::Hadamard {
                left_signs,
                right_signs,
            } => {
                let blocks = left_signs.len();
                let mut p = DMatrix::zeros(blocks * self.d, self.r);
                let mut q = DMatrix::zeros(blocks * self.d, self.r);
                let mut buf = vec![0.0; self.d];
                for k in 0..blocks {
                    for t in 0..self.r {
                        for (i, slot) in buf.iter_mut().enumerate() {
                            *slot = left_signs[k][i] * u[(i, t)];
                        }
                        fwht_normalized(&mut buf);
                        for (i, val) in buf.iter().enumerate() {
                            p[(k * self.d + i, t)] = *val;
                        }
                        for (i, slot) in buf.iter_mut().enumerate() {
                            *slot = right_signs[k][i] * v[(i, t)];
                        }
                        fwht_normalized(&mut buf);
                        for (i, val) in buf.iter().enumerate() {
                            q[(k * self.d + i, t)] = *val;
                        }
                    }
                }
                let z = (0..self.m)
                    .map(|i| (0..self.r).map(|t| p[(i, t)] * q[(i, t)]).sum())
                    .collect();
                (z, p, q)
            }
        }
    }

    /// Accumulates `(1/m) sum_i s_i l_i w_i^T` for per-measurement weights
    /// `w_i` given as rows of `q` (and symmetrically for the right probes).
    fn adjoint(&self, signs: &[f64], p: &DMatrix<f64>, q: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
        let scale = 1.0 / self.m as f64;
        match &self.measurements {
            Measurements::Gaussian { left, right } => {
                let mut sq = q.clone_owned();
                let mut sp = p.clone_owned();
                for i in 0..self.m {
                    for t in 0..self.r {
                        sq[(i, t)] *= signs[i] * scale;
                        sp[(i, t)] *= signs[i] * scale;
                    }
                }
                (left.transpose() * sq, right.transpose() * sp)
            }
            Measurements::Hadamard {
                left_signs,
                right_signs,
            } => {
                let blocks = left_signs.len();
                let mut du = DMatrix::zeros(self.d, self.r);
                let mut dv = DMatrix::zeros(self.d, self.r);
                let mut buf = vec![0.0; self.d];
                for k in 0..blocks {
                    for t in 0..self.r {
                        for (i, slot) in buf.iter_mut().enumerate() {
                            let row = k * self.d + i;
                            *slot = if row < self.m { signs[row] * q[(row, t)] } else { 0.0 };
                        }
                        fwht_normalized(&mut buf);
                        for (i, val) in buf.iter().enumerate() {
                            du[(i, t)] += scale * left_signs[k][i] * val;
                        }
                        for (i, slot) in buf.iter_mut().enumerate() {
                            let row = k * self.d + i;
                            *slot = if row < self.m { signs[row] * p[(row, t)] } else { 0.0 };
                        }
                        fwht_normalized(&mut buf);
                        for (i, val) in buf.iter().enumerate() {
                            dv[(i, t)] += scale * right_signs[k][i] * val;
                        }
                    }
                }
                (du, dv)
            }
        }
    }
}

/// A generated matrix-sensing instance.
#[derive(Clone)]
pub struct MatrixSensingInstance {
    pub d: usize,
    pub r: usize,
    pub m: usize,
    pub kappa_tilde: f64,
    pub ensemble: Ensemble,
    data: Arc<MsData>,
}

impl MatrixSensingInstance {
    /// Planted factors stacked as the oracle's variable (U above V,
    /// column-major).
    pub fn planted_point(&self) -> Vec<f64> {
        self.data.planted.clone()
    }

    /// Ratio of the extreme singular values of the planted matrix.
    pub fn singular_value_ratio(&self) -> f64 {
        let sv = &self.data.singular_values;
        sv[0] / sv[sv.len() - 1]
    }

    /// Start point at relative distance 1 from the planted factors.
    pub fn initial_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        start_at_relative_distance(rng, &self.data.planted, 1.0)
    }
}

fn unpack(data: &MsData, x: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let dr = data.d * data.r;
    let u = DMatrix::from_column_slice(data.d, data.r, &x[..dr]);
    let v = DMatrix::from_column_slice(data.d, data.r, &x[dr..]);
    (u, v)
}

/// Generates a matrix-sensing instance and its oracle over `R^(2dr)`.
pub fn gen_matrix_sensing(
    d: usize,
    r: usize,
    m: usize,
    kappa_tilde: f64,
    ensemble: Ensemble,
    seed: u64,
) -> Result<(Oracle, MatrixSensingInstance)> {
    if d == 0 || r == 0 || m == 0 || r > d {
        return Err(SolverError::InvalidConfig(
            "matrix sensing requires 1 <= r <= d and m >= 1".into(),
        ));
    }
    if !(kappa_tilde >= 1.0) {
        return Err(SolverError::InvalidConfig(
            "condition number must be at least 1".into(),
        ));
    }
    if r == 1 && kappa_tilde > 1.0 {
        return Err(SolverError::InvalidConfig(
            "rank-1 planted matrices have a single singular value; use kappa 1".into(),
        ));
    }
    if ensemble == Ensemble::Hadamard && !d.is_power_of_two() {
        return Err(SolverError::InvalidConfig(
            "the Hadamard ensemble requires power-of-two d".into(),
        ));
    }
    let mut rng = instance_rng(seed);

    // Planted factors: Haar-ish orthonormal columns scaled so that the
    // singular values of U V^T run linearly from kappa down to 1.
    let qu = orthonormal_columns(&mut rng, d, r);
    let qv = orthonormal_columns(&mut rng, d, r);
    let singular_values: Vec<f64> = (0..r)
        .map(|j| {
            if r == 1 {
                1.0
            } else {
                kappa_tilde - (kappa_tilde - 1.0) * j as f64 / (r - 1) as f64
            }
        })
        .collect();
    let mut u_bar = qu;
    let mut v_bar = qv;
    for j in 0..r {
        let s = singular_values[j].sqrt();
        for i in 0..d {
            u_bar[(i, j)] *= s;
            v_bar[(i, j)] *= s;
        }
    }
    let mut planted = Vec::with_capacity(2 * d * r);
    planted.extend(u_bar.iter());
    planted.extend(v_bar.iter());

    let measurements = match ensemble {
        Ensemble::Gaussian => Measurements::Gaussian {
            left: DMatrix::from_fn(m, d, |_, _| rng.sample(rand_distr::StandardNormal)),
            right: DMatrix::from_fn(m, d, |_, _| rng.sample(rand_distr::StandardNormal)),
        },
        Ensemble::Hadamard => {
            let blocks = m.div_ceil(d);
            let rademacher = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                (0..d).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect()
            };
            Measurements::Hadamard {
                left_signs: (0..blocks).map(|_| rademacher(&mut rng)).collect(),
                right_signs: (0..blocks).map(|_| rademacher(&mut rng)).collect(),
            }
        }
    };

    let mut data = MsData {
        d,
        r,
        m,
        measurements,
        targets: Vec::new(),
        planted,
        singular_values,
    };
    let (targets, _, _) = data.forward(&u_bar, &v_bar);
    data.targets = targets;
    let data = Arc::new(data);

    let f_data = Arc::clone(&data);
    let g_data = Arc::clone(&data);
    let oracle = Oracle::new(
        2 * d * r,
        0.0,
        move |x: &[f64]| {
            let (u, v) = unpack(&f_data, x);
            let (z, _, _) = f_data.forward(&u, &v);
            z.iter()
                .zip(&f_data.targets)
                .map(|(zi, yi)| (zi - yi).abs())
                .sum::<f64>()
                / f_data.m as f64
        },
        move |x: &[f64]| {
            let (u, v) = unpack(&g_data, x);
            let (z, p, q) = g_data.forward(&u, &v);
            let signs: Vec<f64> = z
                .iter()
                .zip(&g_data.targets)
                .map(|(zi, yi)| {
                    let r = zi - yi;
                    if r == 0.0 {
                        0.0
                    } else {
                        r.signum()
                    }
                })
                .collect();
            let (du, dv) = g_data.adjoint(&signs, &p, &q);
            let mut grad = Vec::with_capacity(2 * g_data.d * g_data.r);
            grad.extend(du.iter());
            grad.extend(dv.iter());
            grad
        },
    );

    let instance = MatrixSensingInstance {
        d,
        r,
        m,
        kappa_tilde,
        ensemble,
        data,
    };
    Ok((oracle, instance))
}

fn orthonormal_columns(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let raw =
        DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    let qr = raw.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            for i in 0..rows {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

/// In-place Walsh-Hadamard transform scaled by `1/sqrt(n)`, so the implied
/// transform matrix is orthonormal. Length must be a power of two.
pub(crate) fn fwht_normalized(v: &mut [f64]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let a = v[i];
                let b = v[i + h];
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    for x in v.iter_mut() {
        *x *= scale;
    }
}
