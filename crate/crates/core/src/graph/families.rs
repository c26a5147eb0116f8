//! Small named graphs used as test corpora and experiment inputs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Graph;

/// Cycle `C_n` on `0..n`, `i ~ i+1 mod n`. For `n = 1` this is a loop and for
/// `n = 2` a double edge, matching the Schreier graph of `Z / n`.
pub fn cycle(n: usize) -> Graph {
    Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)), 2).expect("cycle is 2-regular")
}

pub fn path(n: usize) -> Graph {
    Graph::new(n, (1..n).map(|i| (i - 1, i)), 2.min(n.saturating_sub(1)).max(1)).expect("path")
}

/// Star `K_{1,k}` with centre 0.
pub fn star(k: usize) -> Graph {
    Graph::from_edges(k + 1, (1..=k).map(|i| (0, i))).expect("star")
}

pub fn complete(n: usize) -> Graph {
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
    Graph::from_edges(n, edges).expect("complete graph")
}

pub fn empty(n: usize) -> Graph {
    Graph::from_edges(n, []).expect("edgeless graph")
}

/// The Petersen graph: outer 5-cycle `0..5`, spokes `i ~ i+5`, inner pentagram.
pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::new(10, edges, 3).expect("petersen")
}

/// The `w x h` torus: vertex `x + w*y`, edges to `(x+1, y)` and `(x, y+1)`.
pub fn torus(w: usize, h: usize) -> Graph {
    let id = |x: usize, y: usize| (x % w) + w * (y % h);
    let mut edges = Vec::with_capacity(2 * w * h);
    for y in 0..h {
        for x in 0..w {
            edges.push((id(x, y), id(x + 1, y)));
            edges.push((id(x, y), id(x, y + 1)));
        }
    }
    Graph::new(w * h, edges, 4).expect("torus is 4-regular")
}

/// Union of `half_degree` uniformly random permutations: the permutation
/// model of a random `2 * half_degree`-regular multigraph.
pub fn random_permutation_graph(n: usize, half_degree: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n * half_degree);
    for _ in 0..half_degree {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        edges.extend((0..n).map(|i| (i, perm[i])));
    }
    Graph::new(n, edges, (2 * half_degree).max(1)).expect("permutation graph")
}

/// A random simple graph with maximum degree at most `max_degree`, built by
/// proposing `attempts` uniformly random pairs.
pub fn random_bounded_degree(n: usize, max_degree: usize, attempts: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deg = vec![0usize; n];
    let mut edges = std::collections::BTreeSet::new();
    if n >= 2 {
        for _ in 0..attempts {
            let u = rng.random_range(0..n);
            let v = rng.random_range(0..n);
            if u == v || deg[u] >= max_degree || deg[v] >= max_degree {
                continue;
            }
            if edges.insert((u.min(v), u.max(v))) {
                deg[u] += 1;
                deg[v] += 1;
            }
        }
    }
    Graph::new(n, edges, max_degree.max(1)).expect("degree bounded by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(petersen().edge_count(), 15);
        assert_eq!(petersen().regular_degree(), Some(3));
        assert_eq!(torus(3, 3).edge_count(), 18);
        assert_eq!(torus(2, 2).regular_degree(), Some(4));
        assert_eq!(complete(4).edge_count(), 6);
        assert_eq!(star(3).degree(0), 3);
        assert_eq!(cycle(1).edges(), &[(0, 0)]);
        let g = random_bounded_degree(30, 3, 200, 1);
        assert!(g.max_degree() <= 3);
        assert_eq!(random_permutation_graph(20, 2, 3).regular_degree(), Some(4));
    }
}
