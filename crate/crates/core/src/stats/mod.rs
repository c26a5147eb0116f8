//! Neighbourhood statistics of finite graphs and distances between them.

mod estimate;
mod model;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ball, BallDecorations, CanonicalCode, Coloring, ColoringError, Graph, GraphError};

pub use estimate::{lg_distance_estimate, LgEstimate, ProbeFamily, ProbeResult};
pub use model::{model_coloring, model_coloring_with, ModelOptions, ModelResult};

const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("distributions differ in shape: (r={r1}, k={k1}) vs (r={r2}, k={k2})")]
    ShapeMismatch { r1: usize, k1: u32, r2: usize, k2: u32 },
    #[error("modeling needs a colored goal distribution")]
    UncoloredGoal,
    #[error("invalid distribution: {0}")]
    Invalid(String),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Probability distribution over canonical codes of rooted `r`-balls.
/// `color_count == 0` marks uncolored balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct NeighborhoodDistribution {
    radius: usize,
    color_count: u32,
    weights: BTreeMap<CanonicalCode, f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    r: usize,
    k: u32,
    entries: Vec<EntryRepr>,
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    code: CanonicalCode,
    p: f64,
}

impl TryFrom<DistributionRepr> for NeighborhoodDistribution {
    type Error = StatsError;
    fn try_from(repr: DistributionRepr) -> Result<Self, StatsError> {
        let mut weights = BTreeMap::new();
        for e in repr.entries {
            if weights.insert(e.code, e.p).is_some() {
                return Err(StatsError::Invalid("duplicate code".into()));
            }
        }
        NeighborhoodDistribution::new(repr.r, repr.k, weights)
    }
}

impl From<NeighborhoodDistribution> for DistributionRepr {
    fn from(d: NeighborhoodDistribution) -> Self {
        DistributionRepr {
            r: d.radius,
            k: d.color_count,
            entries: d
                .weights
                .into_iter()
                .map(|(code, p)| EntryRepr { code, p })
                .collect(),
        }
    }
}

impl NeighborhoodDistribution {
    pub fn new(
        radius: usize,
        color_count: u32,
        weights: BTreeMap<CanonicalCode, f64>,
    ) -> Result<Self, StatsError> {
        if weights.values().any(|&p| !(p.is_finite() && p >= 0.0)) {
            return Err(StatsError::Invalid("negative or non-finite weight".into()));
        }
        let total: f64 = weights.values().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(StatsError::Invalid(format!("total mass {total} is not 1")));
        }
        Ok(NeighborhoodDistribution {
            radius,
            color_count,
            weights,
        })
    }

    /// Empirical distribution of a list of codes, one per vertex.
    pub fn from_codes<'a>(
        radius: usize,
        color_count: u32,
        codes: impl IntoIterator<Item = &'a CanonicalCode>,
    ) -> Result<Self, StatsError> {
        let mut counts: BTreeMap<CanonicalCode, usize> = BTreeMap::new();
        let mut n = 0usize;
        for c in codes {
            *counts.entry(c.clone()).or_default() += 1;
            n += 1;
        }
        if n == 0 {
            return Err(StatsError::EmptyGraph);
        }
        let weights = counts
            .into_iter()
            .map(|(c, m)| (c, m as f64 / n as f64))
            .collect();
        Ok(NeighborhoodDistribution {
            radius,
            color_count,
            weights,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn color_count(&self) -> u32 {
        self.color_count
    }

    pub fn weights(&self) -> &BTreeMap<CanonicalCode, f64> {
        &self.weights
    }

    pub fn weight(&self, code: &CanonicalCode) -> f64 {
        self.weights.get(code).copied().unwrap_or(0.0)
    }

    pub fn support_size(&self) -> usize {
        self.weights.len()
    }

    /// Forgets vertex colors: the image of this distribution under the map
    /// sending a colored ball to its underlying ball.
    pub fn project_uncolored(&self) -> NeighborhoodDistribution {
        let mut weights: BTreeMap<CanonicalCode, f64> = BTreeMap::new();
        for (code, &p) in &self.weights {
            let plain = code
                .decode()
                .expect("distribution codes are produced by the encoder")
                .without_colors()
                .canonical_code();
            *weights.entry(plain).or_default() += p;
        }
        NeighborhoodDistribution {
            radius: self.radius,
            color_count: 0,
            weights,
        }
    }

    /// Distribution of root colors, indexed by color `1..=k` (entry 0 unused).
    pub fn root_color_marginal(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.color_count as usize + 1];
        for (code, &p) in &self.weights {
            if let Some(c) = code.decode().ok().and_then(|b| b.root_color()) {
                if let Some(slot) = out.get_mut(c as usize) {
                    *slot += p;
                }
            }
        }
        out
    }
}

/// Codes of `ball(g, v, r)` for every vertex `v`, in vertex order.
pub fn ball_codes(
    g: &Graph,
    r: usize,
    coloring: Option<&Coloring>,
) -> Result<Vec<CanonicalCode>, StatsError> {
    if g.vertex_count() == 0 {
        return Err(StatsError::EmptyGraph);
    }
    if let Some(c) = coloring {
        c.check_graph(g)?;
    }
    let deco = BallDecorations {
        colors: coloring,
        ..Default::default()
    };
    (0..g.vertex_count())
        .into_par_iter()
        .map(|v| Ok(ball(g, v, r, deco)?.canonical_code()))
        .collect()
}

pub fn neighborhood_distribution(g: &Graph, r: usize) -> Result<NeighborhoodDistribution, StatsError> {
    let codes = ball_codes(g, r, None)?;
    NeighborhoodDistribution::from_codes(r, 0, &codes)
}

pub fn colored_neighborhood_distribution(
    g: &Graph,
    r: usize,
    phi: &Coloring,
) -> Result<NeighborhoodDistribution, StatsError> {
    let codes = ball_codes(g, r, Some(phi))?;
    NeighborhoodDistribution::from_codes(r, phi.color_count(), &codes)
}

/// Half the L1 distance between the weight vectors.
pub fn tv_distance(a: &NeighborhoodDistribution, b: &NeighborhoodDistribution) -> Result<f64, StatsError> {
    if a.radius != b.radius || a.color_count != b.color_count {
        return Err(StatsError::ShapeMismatch {
            r1: a.radius,
            k1: a.color_count,
            r2: b.radius,
            k2: b.color_count,
        });
    }
    let mut l1 = 0.0;
    for (code, &p) in &a.weights {
        l1 += (p - b.weight(code)).abs();
    }
    for (code, &q) in &b.weights {
        if !a.weights.contains_key(code) {
            l1 += q;
        }
    }
    Ok((0.5 * l1).min(1.0))
}

/// Largest uncolored total-variation distance over radii `0..=r_max`.
pub fn bs_distance(g1: &Graph, g2: &Graph, r_max: usize) -> Result<f64, StatsError> {
    let mut worst: f64 = 0.0;
    for r in 0..=r_max {
        let a = neighborhood_distribution(g1, r)?;
        let b = neighborhood_distribution(g2, r)?;
        worst = worst.max(tv_distance(&a, &b)?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    fn sorted_masses(d: &NeighborhoodDistribution) -> Vec<f64> {
        let mut v: Vec<f64> = d.weights().values().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn cycle_is_a_point_mass() {
        let d = neighborhood_distribution(&cycle(9), 1).unwrap();
        assert_eq!(d.support_size(), 1);
        let p3 = crate::graph::ball(&path(3), 1, 1, Default::default()).unwrap();
        assert!(close(d.weight(&p3.canonical_code()), 1.0));
    }

    #[test]
    fn small_trees() {
        let d = neighborhood_distribution(&path(3), 1).unwrap();
        assert_eq!(sorted_masses(&d).len(), 2);
        assert!(close(sorted_masses(&d)[0], 1.0 / 3.0));
        let d = neighborhood_distribution(&star(3), 1).unwrap();
        assert!(close(sorted_masses(&d)[0], 0.25));
        assert!(close(sorted_masses(&d)[1], 0.75));
    }

    #[test]
    fn colored_cycle() {
        let g = cycle(4);
        let phi = Coloring::new(vec![1, 2, 1, 2], 2).unwrap();
        for r in [0, 1] {
            let d = colored_neighborhood_distribution(&g, r, &phi).unwrap();
            assert_eq!(sorted_masses(&d), vec![0.5, 0.5]);
        }
        let constant = colored_neighborhood_distribution(&star(3), 1, &Coloring::constant(4)).unwrap();
        assert_eq!(sorted_masses(&constant), sorted_masses(&neighborhood_distribution(&star(3), 1).unwrap()));
        assert!(colored_neighborhood_distribution(&g, 1, &Coloring::constant(3)).is_err());
    }

    #[test]
    fn tv_examples() {
        let x = crate::graph::ball(&path(3), 0, 1, Default::default()).unwrap().canonical_code();
        let y = crate::graph::ball(&path(3), 1, 1, Default::default()).unwrap().canonical_code();
        let a = NeighborhoodDistribution::new(1, 0, [(x.clone(), 0.75), (y.clone(), 0.25)].into()).unwrap();
        let b = NeighborhoodDistribution::new(1, 0, [(x.clone(), 0.25), (y.clone(), 0.75)].into()).unwrap();
        // Oracle: maximum over the four subsets of {x, y} of the mass difference.
        let oracle = [(0.0, 0.0), (0.75, 0.25), (0.25, 0.75), (1.0, 1.0)]
            .iter()
            .map(|(p, q): &(f64, f64)| (p - q).abs())
            .fold(0.0, f64::max);
        assert!(close(tv_distance(&a, &b).unwrap(), oracle));
        assert!(close(oracle, 0.5));
        let pa = NeighborhoodDistribution::new(1, 0, [(x, 1.0)].into()).unwrap();
        let pb = NeighborhoodDistribution::new(1, 0, [(y, 1.0)].into()).unwrap();
        assert!(close(tv_distance(&pa, &pb).unwrap(), 1.0));
        let other = NeighborhoodDistribution::new(2, 0, pa.weights().clone()).unwrap();
        assert!(tv_distance(&pa, &other).is_err());
    }

    #[test]
    fn bs_examples() {
        let g = petersen();
        assert_eq!(bs_distance(&g, &g, 3).unwrap(), 0.0);
        assert!(close(bs_distance(&cycle(100), &path(100), 1).unwrap(), 0.02));
        let four = random_permutation_graph(100, 2, 1);
        assert!(close(bs_distance(&cycle(100), &four, 1).unwrap(), 1.0));
        assert!(bs_distance(&empty(0), &g, 1).is_err());
    }

    #[test]
    fn json_shape_and_validation() {
        let d = neighborhood_distribution(&path(3), 1).unwrap();
        let text = serde_json::to_string(&d).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["r"], 1);
        assert_eq!(v["k"], 0);
        let codes: Vec<&str> = v["entries"].as_array().unwrap().iter().map(|e| e["code"].as_str().unwrap()).collect();
        assert_eq!(codes.len(), 2);
        let back: NeighborhoodDistribution = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
        let bad = text.replace("0.6666666666666666", "0.9");
        assert!(serde_json::from_str::<NeighborhoodDistribution>(&bad).is_err());
    }

    #[test]
    fn projection_of_single_color_is_exact() {
        for g in [petersen(), path(7), random_bounded_degree(40, 3, 90, 2)] {
            for r in 0..3 {
                let colored = colored_neighborhood_distribution(&g, r, &Coloring::constant(g.vertex_count())).unwrap();
                assert_eq!(colored.project_uncolored(), neighborhood_distribution(&g, r).unwrap());
            }
        }
    }

    fn random_distribution(codes: &[CanonicalCode], raw: &[u32]) -> NeighborhoodDistribution {
        let total: u32 = raw.iter().sum::<u32>().max(1);
        let mut w = BTreeMap::new();
        for (c, &x) in codes.iter().zip(raw) {
            if x > 0 {
                w.insert(c.clone(), x as f64 / total as f64);
            }
        }
        if w.is_empty() {
            w.insert(codes[0].clone(), 1.0);
        }
        let sum: f64 = w.values().sum();
        for p in w.values_mut() {
            *p /= sum;
        }
        NeighborhoodDistribution { radius: 1, color_count: 0, weights: w }
    }

    proptest! {
        #[test]
        fn tv_is_a_metric(a in proptest::collection::vec(0u32..5, 4), b in proptest::collection::vec(0u32..5, 4), c in proptest::collection::vec(0u32..5, 4)) {
            let codes: Vec<CanonicalCode> = (0..4).map(|i| crate::graph::ball(&star(i + 1), 0, 1, Default::default()).unwrap().canonical_code()).collect();
            let (x, y, z) = (random_distribution(&codes, &a), random_distribution(&codes, &b), random_distribution(&codes, &c));
            let d = |p: &NeighborhoodDistribution, q: &NeighborhoodDistribution| tv_distance(p, q).unwrap();
            prop_assert_eq!(d(&x, &x), 0.0);
            prop_assert!((d(&x, &y) - d(&y, &x)).abs() < 1e-15);
            prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
            prop_assert!((0.0..=1.0).contains(&d(&x, &y)));
        }
    }
}
