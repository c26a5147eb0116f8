//! Dispersiveness diagnostics for Schreier graph sequences and the
//! amalgam certificate that links partitions to rank bounds.

mod amalgam;
mod partition;
mod report;
mod spectral;

use thiserror::Error;

use crate::schreier::SchreierError;

pub use amalgam::{amalgam_certificate, AmalgamCertificate, Hypotheses, Inequality, Violation};
pub use partition::{
    balanced_partition, boundary_vertex_sum, partition_coloring, Partition, PartitionResult, PartitionStatus,
    PartitionVerdict, StepGraph,
};
pub use report::{trichotomy_report, Branch, ReportOptions, TrichotomyReport, TrichotomyRow};
pub use spectral::{laplacian_embedding, spectral_gap, GapKind, Solver, SpectralGap, DENSE_LIMIT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrichotomyError {
    #[error("graph, presentation and partition disagree (index {graph}, presentation {presentation}, partition {partition})")]
    Mismatch {
        graph: usize,
        presentation: usize,
        partition: usize,
    },
    #[error("c must be positive and finite, got {0}")]
    InvalidC(f64),
    #[error("no k satisfies the inequality below {0}")]
    KTooLarge(usize),
    #[error(transparent)]
    Schreier(#[from] SchreierError),
}

const K_LIMIT: usize = 1 << 40;

/// Least `k >= 1` with `(3/2 |S| + 1) / k <= c / 2`.
pub fn choose_k(s_size: usize, c: f64) -> Result<usize, TrichotomyError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(TrichotomyError::InvalidC(c));
    }
    let numerator = (3 * s_size + 2) as f64;
    let ok = |k: usize| numerator / k as f64 <= c;
    let guess = (numerator / c).ceil();
    if guess > K_LIMIT as f64 {
        return Err(TrichotomyError::KTooLarge(K_LIMIT));
    }
    let mut k = (guess as usize).max(1);
    while !ok(k) {
        k += 1;
    }
    while k > 1 && ok(k - 1) {
        k -= 1;
    }
    Ok(k)
}
