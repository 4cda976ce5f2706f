//! Nonsmooth optimization via Polyak-stepsize subgradient steps, bundle
//! linearization steps, and the coupled SuperPolyak driver, for sharp
//! semismooth problems with known optimal value.
//!
//! The crate ships four seeded signal-recovery problem families (low-rank
//! matrix sensing, max-linear regression, phase retrieval, compressed
//! sensing), first-order fallback mappings for each, and a CLI harness that
//! emits CSV convergence traces.

// Config validation uses negated comparisons (`!(x > 0.0)`) on purpose:
// they reject NaN, which `x <= 0.0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fallbacks;
pub mod harness;
pub mod oracle;
pub mod polyak_bundle;
pub mod polyak_sgm;
pub mod problems;
pub mod qr_bundle;
pub mod solver;

pub use error::{Result, SolverError};
pub use fallbacks::{
    alternating_projection_map, fallback_run, fixed_point_map, polyak_map, AlgorithmicMapping,
    FallbackResult,
};
pub use oracle::{
    gap, record, HistoryRecord, Oracle, OracleCounter, RegularityMetadata, RunHistory, StepKind,
};
pub use polyak_bundle::{
    bundle_step, run_bundle, BundleConfig, BundleOutcome, BundleTermination,
};
pub use polyak_sgm::{polyak_step, run_sgm, RunStatus, SgmConfig, SgmResult};
pub use qr_bundle::{apply_pinv, pinv_dense_oracle, qr_append, qr_init, AppendResult, QrState};
pub use solver::{run_superpolyak, update_eta, OuterStep, SolveReport, SuperConfig};
