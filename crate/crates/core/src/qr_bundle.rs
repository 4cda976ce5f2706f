//! Incrementally maintained reduced QR factorization of the transposed
//! bundle matrix.
//!
//! The bundle matrix `A_i` stacks gradient rows `v_0^T, ..., v_{i-1}^T`. We
//! keep the reduced factorization `A_i^T = Q R` with `Q` stored implicitly
//! in compact-WY form `Q = I - U T U^T` (one Householder reflector per
//! appended row), so appending a row costs `O(d*i)` arithmetic and applying
//! the pseudoinverse `A_i^+ = Q R^{-T}` costs `O(d*i)` as well. A full
//! `d`-step bundle build therefore costs `O(d^3)` total instead of the
//! `O(d^4)` of per-step dense refactorization.
//!
//! The `R` diagonal is kept nonnegative (per-column sign flips), which makes
//! factorizations reproducible across platforms.

use nalgebra::DMatrix;

use crate::error::{Result, SolverError};

/// Base relative rank tolerance; scaled by the largest `R` diagonal seen.
pub const RANK_TOL_BASE: f64 = 1e-10;

/// Outcome of [`qr_append`]. `RankDeficient` is returned (and the state left
/// untouched) when the new row's component orthogonal to the current row
/// span falls below the rank tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AppendResult {
    Updated,
    RankDeficient,
}

/// Reduced QR factorization of `A_i^T` in compact-WY form.
///
/// Single-owner mutable; safe to move between threads between calls.
#[derive(Clone, Debug)]
pub struct QrState {
    dim: usize,
    /// Householder vectors, one full-length column per appended row; column
    /// `j` is zero before index `j` and has a 1 at index `j`.
    u_cols: Vec<Vec<f64>>,
    /// Upper-triangular WY factor `T`, stored by columns (`t_cols[j][k] = T[k][j]`).
    t_cols: Vec<Vec<f64>>,
    /// Upper-triangular `R` with nonnegative diagonal, stored by columns.
    r_cols: Vec<Vec<f64>>,
    /// Per-column sign relating the raw Householder `Q` to the effective `Q`.
    signs: Vec<f64>,
    /// Raw appended rows `v_0, ..., v_{i-1}` (needed for the dense escape path).
    rows: Vec<Vec<f64>>,
    max_diag: f64,
}

impl QrState {
    /// Ambient dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Current number of rows `i` of `A_i`.
    pub fn count(&self) -> usize {
        self.rows.len()
    }

    /// Raw rows appended so far.
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Current rank tolerance: `1e-10 * max(1, largest R diagonal seen)`.
    pub fn tol_rank(&self) -> f64 {
        RANK_TOL_BASE * self.max_diag.max(1.0)
    }

    /// Dense copy of `R` (upper triangular, nonnegative diagonal). Test and
    /// diagnostic use; the solvers never materialize it.
    pub fn r_matrix(&self) -> DMatrix<f64> {
        let i = self.count();
        let mut r = DMatrix::zeros(i, i);
        for (col, rc) in self.r_cols.iter().enumerate() {
            for (row, &val) in rc.iter().enumerate() {
                r[(row, col)] = val;
            }
        }
        r
    }

    /// Applies the effective thin `Q` (d x i) to a coefficient vector.
    pub fn apply_q(&self, z: &[f64]) -> Vec<f64> {
        let i = self.count();
        assert_eq!(z.len(), i, "coefficient length must match row count");
        let mut p = vec![0.0; self.dim];
        for k in 0..i {
            p[k] = self.signs[k] * z[k];
        }
        // p - U (T (U^T p))
        let c = self.ut_apply(&p);
        let mut b = vec![0.0; i];
        for (k, slot) in b.iter_mut().enumerate() {
            *slot = self.t_cols[k..]
                .iter()
                .zip(&c[k..])
                .map(|(tcol, cj)| tcol[k] * cj)
                .sum();
        }
        for (coeff, ucol) in b.iter().zip(&self.u_cols) {
            if *coeff != 0.0 {
                axpy(-coeff, ucol, &mut p);
            }
        }
        p
    }

    /// `U^T p` for a full-length vector `p`.
    fn ut_apply(&self, p: &[f64]) -> Vec<f64> {
        self.u_cols.iter().map(|u| dot(u, p)).collect()
    }

    /// Applies the raw (unsigned) full `Q^T` to a vector: `p - U (T^T (U^T p))`.
    fn qt_apply_full(&self, p: &[f64]) -> Vec<f64> {
        let i = self.count();
        let c = self.ut_apply(p);
        let mut b = vec![0.0; i];
        for (j, slot) in b.iter_mut().enumerate() {
            // Column j of T holds T[0..=j][j].
            *slot = self.t_cols[j].iter().zip(&c).map(|(t, cv)| t * cv).sum();
        }
        let mut out = p.to_vec();
        for (coeff, ucol) in b.iter().zip(&self.u_cols) {
            if *coeff != 0.0 {
                axpy(-coeff, ucol, &mut out);
            }
        }
        out
    }
}

/// Initializes the factorization with the first row `v0` (so `A_1^T = v0`).
///
/// Returns [`SolverError::ZeroGradient`] when `||v0||` is at or below the
/// base rank tolerance, signalling that the point is stationary for the
/// bundle model.
pub fn qr_init(v0: &[f64]) -> Result<QrState> {
    let norm = norm2(v0);
    if norm <= RANK_TOL_BASE {
        return Err(SolverError::ZeroGradient);
    }
    let (u, tau, beta) = householder(v0);
    Ok(QrState {
        dim: v0.len(),
        u_cols: vec![u],
        t_cols: vec![vec![tau]],
        r_cols: vec![vec![beta.abs()]],
        signs: vec![beta.signum()],
        rows: vec![v0.to_vec()],
        max_diag: beta.abs(),
    })
}

/// Appends a row `v` to the factorization in `O(d*i)` arithmetic (one
/// compact-WY update, never a from-scratch refactorization).
///
/// On `RankDeficient` the state is unchanged; the caller is expected to fall
/// back to [`pinv_dense_oracle`] once and stop appending.
pub fn qr_append(state: &mut QrState, v: &[f64]) -> AppendResult {
    assert_eq!(v.len(), state.dim, "row length must match ambient dimension");
    let i = state.count();
    if i >= state.dim {
        // A (d+1)-th row of a d-column matrix is always dependent.
        return AppendResult::RankDeficient;
    }

    let w = state.qt_apply_full(v);
    let bot_norm = norm2(&w[i..]);
    if bot_norm <= state.tol_rank() * norm2(v).max(1.0) {
        return AppendResult::RankDeficient;
    }

    let (u_sub, tau, beta) = householder(&w[i..]);
    let mut u_new = vec![0.0; state.dim];
    u_new[i..].copy_from_slice(&u_sub);

    // T update: T <- [[T, -tau * T (U^T u_new)], [0, tau]].
    let c = state.ut_apply(&u_new);
    let mut t_new = vec![0.0; i + 1];
    for (k, slot) in t_new.iter_mut().enumerate().take(i) {
        let acc: f64 = state.t_cols[k..]
            .iter()
            .zip(&c[k..])
            .map(|(tcol, cj)| tcol[k] * cj)
            .sum();
        *slot = -tau * acc;
    }
    t_new[i] = tau;

    let mut r_new = vec![0.0; i + 1];
    for k in 0..i {
        r_new[k] = state.signs[k] * w[k];
    }
    r_new[i] = beta.abs();

    state.u_cols.push(u_new);
    state.t_cols.push(t_new);
    state.r_cols.push(r_new);
    state.signs.push(beta.signum());
    state.rows.push(v.to_vec());
    state.max_diag = state.max_diag.max(beta.abs());
    AppendResult::Updated
}

/// Applies the pseudoinverse: returns `A_i^+ w = Q R^{-T} w`, the
/// minimum-norm solution of `A_i x = w`. The result lies in `range(A_i^T)`.
pub fn apply_pinv(state: &QrState, w: &[f64]) -> Vec<f64> {
    let i = state.count();
    assert_eq!(w.len(), i, "right-hand side length must match row count");
    // Forward substitution with R^T (lower triangular).
    let mut z = vec![0.0; i];
    for k in 0..i {
        let col = &state.r_cols[k];
        let acc: f64 = col[..k].iter().zip(&z).map(|(r, zj)| r * zj).sum();
        z[k] = (w[k] - acc) / col[k];
    }
    state.apply_q(&z)
}

/// Dense reference pseudoinverse: the minimum-norm least-squares solution of
/// `A x = w` via a full SVD with singular values truncated at the rank
/// tolerance. Used by tests as the independent oracle for [`apply_pinv`] and
/// by the bundle loop as the one-shot escape path on rank deficiency.
pub fn pinv_dense_oracle(rows: &[Vec<f64>], w: &[f64]) -> Vec<f64> {
    let i = rows.len();
    assert_eq!(w.len(), i, "right-hand side length must match row count");
    if i == 0 {
        return Vec::new();
    }
    let d = rows[0].len();
    let a = DMatrix::from_fn(i, d, |r, c| rows[r][c]);
    let svd = a.svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let vt = svd.v_t.as_ref().expect("svd with v_t");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let tol = RANK_TOL_BASE * sigma_max.max(1.0);

    let mut x = vec![0.0; d];
    for k in 0..svd.singular_values.len() {
        let s = svd.singular_values[k];
        if s <= tol {
            continue;
        }
        let mut coeff = 0.0;
        for r in 0..i {
            coeff += u[(r, k)] * w[r];
        }
        coeff /= s;
        for c in 0..d {
            x[c] += coeff * vt[(k, c)];
        }
    }
    x
}

/// LAPACK-style Householder reflector: returns `(u, tau, beta)` with
/// `u[0] = 1` and `(I - tau u u^T) x = beta e_1`.
fn householder(x: &[f64]) -> (Vec<f64>, f64, f64) {
    let alpha = x[0];
    let tail_norm = norm2(&x[1..]);
    if tail_norm == 0.0 {
        // Already aligned with e_1; no reflection needed.
        let mut u = vec![0.0; x.len()];
        u[0] = 1.0;
        return (u, 0.0, alpha);
    }
    let norm = alpha.hypot(tail_norm);
    let beta = if alpha >= 0.0 { -norm } else { norm };
    let tau = (beta - alpha) / beta;
    let scale = 1.0 / (alpha - beta);
    let mut u = Vec::with_capacity(x.len());
    u.push(1.0);
    u.extend(x[1..].iter().map(|&v| v * scale));
    (u, tau, beta)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
