//! Pipeline stages and file formats behind the `chronocycle` binary.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod pca;
pub mod pipeline;
pub mod synth;

/// A problem with the invocation or the configuration.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// Process exit status for an error.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<UsageError>()) {
        return 1;
    }
    match err.chain().find_map(|e| e.downcast_ref::<chronocycle::Error>()) {
        Some(chronocycle::Error::SolverStalled(_) | chronocycle::Error::SolverFailed(_)) => 3,
        _ => 2,
    }
}
