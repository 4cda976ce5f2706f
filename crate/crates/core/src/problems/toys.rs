//! Tiny closed-form oracles used by tests and examples.

use crate::oracle::{Oracle, RegularityMetadata};

/// `f(x) = ||x||_1` with minimizer 0. The gradient selection is the sign
/// vector with `sign(0) = 0`. Sharp with `mu = 1` and gradient norms at
/// most `sqrt(d)`.
pub fn l1_norm(dim: usize) -> (Oracle, RegularityMetadata) {
    let oracle = Oracle::new(
        dim,
        0.0,
        |x: &[f64]| x.iter().map(|v| v.abs()).sum(),
        |x: &[f64]| {
            x.iter()
                .map(|v| if *v == 0.0 { 0.0 } else { v.signum() })
                .collect()
        },
    );
    let metadata = RegularityMetadata {
        mu: Some(1.0),
        lipschitz: Some((dim as f64).sqrt()),
        c_b: Some(0.0),
        eta: Some(1.0),
    };
    (oracle, metadata)
}

/// `f(x) = max(|x_1|, |x_2|)`, the lowest-index maximizing piece selected.
pub fn max_abs() -> Oracle {
    Oracle::new(
        2,
        0.0,
        |x: &[f64]| x[0].abs().max(x[1].abs()),
        |x: &[f64]| {
            if x[0].abs() >= x[1].abs() {
                vec![if x[0] == 0.0 { 0.0 } else { x[0].signum() }, 0.0]
            } else {
                vec![0.0, x[1].signum()]
            }
        },
    )
}
