use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Graph, Vertex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColoringError {
    #[error("color {color} at vertex {vertex} is outside 1..={count}")]
    OutOfRange { vertex: usize, color: u32, count: u32 },
    #[error("coloring covers {got} vertices, graph has {expected}")]
    WrongLength { got: usize, expected: usize },
    #[error("color count must be positive")]
    NoColors,
}

/// A vertex coloring with colors `1..=color_count`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Coloring {
    assignment: Vec<u32>,
    color_count: u32,
}

impl Coloring {
    pub fn new(assignment: Vec<u32>, color_count: u32) -> Result<Self, ColoringError> {
        if color_count == 0 {
            return Err(ColoringError::NoColors);
        }
        if let Some((vertex, &color)) = assignment
            .iter()
            .enumerate()
            .find(|(_, &c)| c == 0 || c > color_count)
        {
            return Err(ColoringError::OutOfRange {
                vertex,
                color,
                count: color_count,
            });
        }
        Ok(Coloring {
            assignment,
            color_count,
        })
    }

    /// Every vertex gets color 1.
    pub fn constant(n: usize) -> Self {
        Coloring {
            assignment: vec![1; n],
            color_count: 1,
        }
    }

    pub fn color(&self, v: Vertex) -> u32 {
        self.assignment[v]
    }

    pub fn color_count(&self) -> u32 {
        self.color_count
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.assignment
    }

    pub fn check_graph(&self, g: &Graph) -> Result<(), ColoringError> {
        if self.assignment.len() == g.vertex_count() {
            Ok(())
        } else {
            Err(ColoringError::WrongLength {
                got: self.assignment.len(),
                expected: g.vertex_count(),
            })
        }
    }

    /// Folds colors into `1..=k` by reduction modulo `k`.
    pub fn fold(&self, k: u32) -> Coloring {
        let k = k.max(1);
        Coloring {
            assignment: self.assignment.iter().map(|&c| (c - 1) % k + 1).collect(),
            color_count: k.min(self.color_count),
        }
    }
}

/// Output of [`power_distance_coloring`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceColoring {
    pub coloring: Coloring,
    pub colors_used: u32,
    /// `1 + d * D * max(1, D - 1)^(d - 1)`, an upper bound on the number of
    /// vertices within distance `d` of any vertex and hence on greedy colors.
    pub greedy_bound: f64,
}

/// Greedy proper coloring of the distance-`d` power of `g`: vertices are
/// processed in increasing id and take the smallest color unused within
/// distance `d`.
pub fn power_distance_coloring(g: &Graph, d: usize) -> DistanceColoring {
    let n = g.vertex_count();
    let mut colors = vec![0u32; n];
    let mut used = Vec::new();
    for v in 0..n {
        used.clear();
        for (w, _) in g.bfs_within(v, d) {
            if colors[w] != 0 {
                used.push(colors[w]);
            }
        }
        used.sort_unstable();
        used.dedup();
        let mut c = 1;
        for &u in &used {
            if u == c {
                c += 1;
            } else if u > c {
                break;
            }
        }
        colors[v] = c;
    }
    let colors_used = colors.iter().copied().max().unwrap_or(1);
    let dd = g.degree_bound() as f64;
    let greedy_bound = if d == 0 {
        1.0
    } else {
        1.0 + d as f64 * dd * (dd - 1.0).max(1.0).powi(d as i32 - 1)
    };
    DistanceColoring {
        coloring: Coloring {
            assignment: colors,
            color_count: colors_used,
        },
        colors_used,
        greedy_bound,
    }
}

#[cfg(test)]
mod tests {
    use super::super::families::*;
    use super::*;
    use proptest::prelude::*;

    fn assert_distance_proper(g: &Graph, c: &Coloring, d: usize) {
        for v in 0..g.vertex_count() {
            let dist = g.distances_from(v);
            for w in 0..g.vertex_count() {
                if w != v && dist[w].is_some_and(|x| x <= d) {
                    assert_ne!(c.color(v), c.color(w), "{v} and {w} at distance {:?}", dist[w]);
                }
            }
        }
    }

    #[test]
    fn examples() {
        let single = power_distance_coloring(&empty(1), 5);
        assert_eq!(single.colors_used, 1);

        let c7 = power_distance_coloring(&cycle(7), 3);
        let mut seen: Vec<u32> = c7.coloring.as_slice().to_vec();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 7);

        let g = cycle(6);
        let c6 = power_distance_coloring(&g, 1);
        for &(u, v) in g.edges() {
            assert_ne!(c6.coloring.color(u), c6.coloring.color(v));
        }
    }

    #[test]
    fn rejects_bad_colorings() {
        assert!(Coloring::new(vec![1, 0], 2).is_err());
        assert!(Coloring::new(vec![1, 3], 2).is_err());
        assert!(Coloring::new(vec![], 0).is_err());
        assert_eq!(Coloring::new(vec![5, 6], 6).unwrap().fold(4).as_slice(), &[1, 2]);
    }

    proptest! {
        #[test]
        fn distance_coloring_is_proper(n in 1usize..30, d in 1usize..4, seed in any::<u64>()) {
            let g = random_bounded_degree(n, 3, 2 * n, seed);
            let out = power_distance_coloring(&g, d);
            assert_distance_proper(&g, &out.coloring, d);
            prop_assert!(out.colors_used as f64 <= out.greedy_bound);
        }
    }
}
