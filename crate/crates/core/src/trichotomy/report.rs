use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    amalgam_certificate, balanced_partition, choose_k, spectral_gap, AmalgamCertificate, Hypotheses, Partition,
    PartitionVerdict, SpectralGap, StepGraph, TrichotomyError,
};
use crate::schreier::{rank_gradient_table, reidemeister_schreier, Presentation, RankOptions, RankRow, SchreierGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    pub rank: RankOptions,
    /// Move evaluations per partition search.
    pub partition_budget: usize,
    pub seed: u64,
    /// Build the certificate whenever the partition hypotheses hold, not
    /// only when the rank quotient exceeds `c`.
    pub always_certify: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            rank: RankOptions::default(),
            partition_budget: 200_000,
            seed: 0,
            always_certify: false,
        }
    }
}

/// Which alternative the finite data point towards. Every branch is
/// evidence about one member of the sequence, not a proof about the
/// sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Rank quotient above `c` and no thin balanced partition found.
    NotDispersive,
    /// Rank quotient at most `c`.
    RankGradientSmall,
    /// Rank quotient above `c` and a thin balanced partition exists, so the
    /// subgroup splits as an amalgam.
    Amalgam,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrichotomyRow {
    pub index: usize,
    pub rank: RankRow,
    pub spectral: SpectralGap,
    pub k: usize,
    pub epsilon: f64,
    pub partition: Option<Partition>,
    /// Balanced within `epsilon` and boundary vertex sum below `epsilon n`.
    pub partition_verdict: Option<PartitionVerdict>,
    /// The stricter conditions the rank bound needs.
    pub hypotheses: Option<Hypotheses>,
    pub certificate: Option<AmalgamCertificate>,
    pub branch: Branch,
    /// Whether the rank quotient exceeds the certificate's bound for a
    /// trivial amalgam, which rules the trivial case out.
    pub nontrivial_inferred: Option<bool>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrichotomyReport {
    pub c: f64,
    pub s_size: usize,
    /// Total relator length.
    pub m: usize,
    pub k: usize,
    pub rows: Vec<TrichotomyRow>,
    pub caveat: String,
}

const CAVEAT: &str = "Finite diagnostics only. Dispersiveness concerns all limits of the sequence; a vanishing \
    spectral gap and thin balanced partitions at growing k are evidence for it, and their absence is evidence \
    against. Non-triviality of an amalgam is not decided: it is inferred from the rank quotient exceeding the \
    bound that a trivial amalgam would force.";

/// Per-graph rank bounds, spectral gap, a partition search at
/// `k = choose_k(|S|, c)` and, where applicable, an amalgam certificate.
/// Graphs are processed in parallel.
pub fn trichotomy_report(
    p: &Presentation,
    schs: &[SchreierGraph],
    c: f64,
    opts: ReportOptions,
) -> Result<TrichotomyReport, TrichotomyError> {
    let g = p.generator_count();
    let k = choose_k(g, c)?;
    let m = p.relator_length();
    let rank_rows = rank_gradient_table(p, schs, &[], opts.rank)?;
    let rows = schs
        .par_iter()
        .zip(rank_rows)
        .enumerate()
        .map(|(i, (sch, rank))| row(p, sch, rank, c, k, opts, opts.seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TrichotomyReport {
        c,
        s_size: g,
        m,
        k,
        rows,
        caveat: CAVEAT.into(),
    })
}

fn row(
    p: &Presentation,
    sch: &SchreierGraph,
    rank: RankRow,
    c: f64,
    k: usize,
    opts: ReportOptions,
    seed: u64,
) -> Result<TrichotomyRow, TrichotomyError> {
    let n = sch.n();
    let m = p.relator_length();
    let spectral = spectral_gap(&sch.to_graph());
    let epsilon = 0.5 / k as f64;
    let small = rank.r_upper <= c;
    let large = rank.r_lower > c;

    if k > n {
        let branch = if small { Branch::RankGradientSmall } else { Branch::Undetermined };
        return Ok(TrichotomyRow {
            index: n,
            rank,
            spectral,
            k,
            epsilon,
            partition: None,
            partition_verdict: None,
            hypotheses: None,
            certificate: None,
            branch,
            nontrivial_inferred: None,
            note: format!("k = {k} exceeds the index {n}; no partition searched"),
        });
    }

    let sg = StepGraph::from_schreier(sch);
    let found = balanced_partition(&sg, k, epsilon, opts.partition_budget, seed);
    let part = found.partition;
    let nf = n as f64;
    let half = nf / (2.0 * k as f64);
    let hypotheses = Hypotheses {
        balanced: part
            .blocks
            .iter()
            .all(|b| nf / k as f64 - half < b.len() as f64 && (b.len() as f64) < nf / k as f64 + half),
        thin_boundary: (part.boundary_edges.len() * (1 + m * m) * k) < n,
    };

    let certify = hypotheses.hold() && (large || opts.always_certify);
    let certificate = if certify {
        let sp = reidemeister_schreier(sch, p)?;
        Some(amalgam_certificate(sch, &sp, &part)?)
    } else {
        None
    };
    let nontrivial_inferred = certificate
        .as_ref()
        .filter(|_| large)
        .map(|cert| rank.r_lower > cert.rank_quotient_bound);

    let (branch, note) = if small {
        (
            Branch::RankGradientSmall,
            format!("rank quotient at most {:.6} <= c", rank.r_upper),
        )
    } else if large && hypotheses.hold() {
        let note = match nontrivial_inferred {
            Some(true) => "thin balanced partition found; the amalgam over L = <Y> is non-trivial \
                           because the rank quotient exceeds the bound a trivial amalgam forces"
                .to_string(),
            _ => "thin balanced partition found, but the index is too small for the rank quotient to \
                  exceed the trivial-amalgam bound"
                .to_string(),
        };
        (Branch::Amalgam, note)
    } else if large {
        let why = match (hypotheses.balanced, hypotheses.thin_boundary) {
            (false, false) => "sizes and boundary",
            (false, true) => "sizes",
            _ => "boundary",
        };
        (
            Branch::NotDispersive,
            format!(
                "rank quotient above c; best partition within budget violates the {why} condition \
                 (spectral gap {:.4})",
                spectral.gap
            ),
        )
    } else {
        (
            Branch::Undetermined,
            format!("rank quotient bounds [{:.6}, {:.6}] straddle c", rank.r_lower, rank.r_upper),
        )
    };

    Ok(TrichotomyRow {
        index: n,
        rank,
        spectral,
        k,
        epsilon,
        partition_verdict: Some(found.verdict),
        partition: Some(part),
        hypotheses: Some(hypotheses),
        certificate,
        branch,
        nontrivial_inferred,
        note,
    })
}
