//! Probing the distance between the sets of colored statistics of two graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    colored_neighborhood_distribution, model_coloring_with, neighborhood_distribution, tv_distance, ModelOptions,
    StatsError,
};
use crate::graph::{power_distance_coloring, Coloring, Graph};

/// Colorings used as probes. Each family is applied to both graphs.
#[derive(Debug, Clone)]
pub enum ProbeFamily {
    /// Uniformly random colorings.
    Random { count: usize },
    /// The greedy distance coloring at the given distance, folded into `k` colors.
    DistanceColoring { distance: usize },
    /// Block-indicator colorings of a low-boundary partition into `k` parts.
    Partition,
    /// Caller-supplied colorings of the first and second graph.
    Given { first: Vec<Coloring>, second: Vec<Coloring> },
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeResult {
    /// `true` when the probe colors the first graph and is modeled on the second.
    pub from_first: bool,
    pub family: String,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LgEstimate {
    /// Largest modeling residual over all probes. A lower bound on the
    /// distance only insofar as the modeling search is optimal.
    pub heuristic_lower: f64,
    /// Uncolored total-variation distance at radius `r`; forgetting colors
    /// cannot increase total variation, so this bound always holds.
    pub certified_lower: f64,
    /// 0 for equal graphs, exact for `k = 1`, and the trivial 1 otherwise.
    pub upper: f64,
    pub probes: Vec<ProbeResult>,
}

fn probes_for(
    g: &Graph,
    k: u32,
    family: &ProbeFamily,
    first: bool,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(String, Coloring)>, StatsError> {
    let n = g.vertex_count();
    Ok(match family {
        ProbeFamily::Random { count } => (0..*count)
            .map(|i| {
                let c: Vec<u32> = (0..n).map(|_| rng.random_range(1..=k)).collect();
                (format!("random#{i}"), Coloring::new(c, k).expect("colors in range"))
            })
            .collect(),
        ProbeFamily::DistanceColoring { distance } => {
            let folded = power_distance_coloring(g, *distance).coloring.fold(k);
            vec![(
                format!("distance{distance}"),
                Coloring::new(folded.as_slice().to_vec(), k)?,
            )]
        }
        ProbeFamily::Partition => crate::trichotomy::partition_coloring(g, k as usize, rng.random())
            .map(|c| ("partition".to_string(), c))
            .into_iter()
            .collect(),
        ProbeFamily::Given {
            first: a,
            second: b,
        } => {
            let list = if first { a } else { b };
            let mut out = Vec::new();
            for (i, c) in list.iter().enumerate() {
                c.check_graph(g)?;
                out.push((format!("given#{i}"), Coloring::new(c.as_slice().to_vec(), k)?));
            }
            out
        }
    })
}

/// Probes both directions: every probe coloring of one graph becomes a goal
/// that is modeled on the other, starting from the index-wrapped copy of the
/// probe as well as from random restarts.
pub fn lg_distance_estimate(
    g1: &Graph,
    g2: &Graph,
    r: usize,
    k: u32,
    families: &[ProbeFamily],
    budget: usize,
    seed: u64,
) -> Result<LgEstimate, StatsError> {
    if k == 0 {
        return Err(StatsError::UncoloredGoal);
    }
    let certified_lower = tv_distance(&neighborhood_distribution(g1, r)?, &neighborhood_distribution(g2, r)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = Vec::new();
    for (from_first, source, target) in [(true, g1, g2), (false, g2, g1)] {
        for family in families {
            for (name, phi) in probes_for(source, k, family, from_first, &mut rng)? {
                let goal = colored_neighborhood_distribution(source, r, &phi)?;
                let m = source.vertex_count();
                let wrapped: Vec<u32> = (0..target.vertex_count()).map(|i| phi.color(i % m)).collect();
                let out = model_coloring_with(
                    target,
                    &goal,
                    &ModelOptions {
                        budget,
                        restarts: 2,
                        seed: rng.random(),
                        initial: vec![Coloring::new(wrapped, k)?],
                        ..Default::default()
                    },
                )?;
                probes.push(ProbeResult {
                    from_first,
                    family: name,
                    residual: out.achieved_tv,
                });
            }
        }
    }
    let heuristic_lower = probes.iter().map(|p| p.residual).fold(0.0, f64::max);
    let upper = if g1 == g2 {
        0.0
    } else if k == 1 {
        certified_lower
    } else {
        1.0
    };
    Ok(LgEstimate {
        heuristic_lower,
        certified_lower,
        upper,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;

    #[test]
    fn graph_against_itself() {
        let g = petersen();
        let est = lg_distance_estimate(&g, &g, 1, 2, &[ProbeFamily::Random { count: 3 }], 400, 1).unwrap();
        assert_eq!(est.heuristic_lower, 0.0);
        assert_eq!(est.upper, 0.0);
        assert_eq!(est.probes.len(), 6);
    }

    #[test]
    fn disjoint_degrees() {
        let g1 = cycle(30);
        let g2 = random_permutation_graph(30, 2, 4);
        let est = lg_distance_estimate(&g1, &g2, 1, 2, &[ProbeFamily::Random { count: 1 }], 200, 2).unwrap();
        assert_eq!(est.heuristic_lower, 1.0);
        assert_eq!(est.certified_lower, 1.0);
    }

    #[test]
    fn single_color_upper_is_exact() {
        let est = lg_distance_estimate(&cycle(10), &path(10), 1, 1, &[ProbeFamily::Random { count: 1 }], 50, 0).unwrap();
        assert!((est.upper - 0.2).abs() < 1e-12);
        assert!((est.heuristic_lower - 0.2).abs() < 1e-12);
    }
}
