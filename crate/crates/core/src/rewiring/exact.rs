//! Exact minimum-density rewiring for tiny graphs by subset search.

use std::collections::VecDeque;

use serde::Serialize;

use super::{edge_density, RewiringError};
use crate::graph::Graph;

/// Largest candidate edge set the exact search accepts.
pub const MAX_EXACT_CANDIDATES: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactRewiring {
    pub density: f64,
    pub rewired: Graph,
}

struct Search {
    n: usize,
    l: usize,
    candidates: Vec<(usize, usize)>,
    base: Vec<(usize, usize)>,
}

impl Search {
    /// Whether the edges selected by `mask` keep every base edge within `L`.
    fn valid(&self, mask: u32) -> bool {
        let mut adj = vec![Vec::new(); self.n];
        for (i, &(u, v)) in self.candidates.iter().enumerate() {
            if mask >> i & 1 == 1 {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
        let mut dist = vec![usize::MAX; self.n];
        let mut queue = VecDeque::new();
        let mut source = usize::MAX;
        for &(x, y) in &self.base {
            if x != source {
                source = x;
                dist.fill(usize::MAX);
                dist[x] = 0;
                queue.clear();
                queue.push_back(x);
                while let Some(u) = queue.pop_front() {
                    if dist[u] == self.l {
                        continue;
                    }
                    for &w in &adj[u] {
                        if dist[w] == usize::MAX {
                            dist[w] = dist[u] + 1;
                            queue.push_back(w);
                        }
                    }
                }
            }
            if dist[y] > self.l {
                return false;
            }
        }
        true
    }

    /// First subset of exactly `size` candidates (in lexicographic order of
    /// inclusion decisions) forming a valid rewiring.
    fn find(&self, i: usize, chosen: u32, count: usize, size: usize) -> Option<u32> {
        let c = self.candidates.len();
        if count == size {
            return self.valid(chosen).then_some(chosen);
        }
        if i == c || count + (c - i) < size {
            return None;
        }
        if let Some(found) = self.find(i + 1, chosen | 1 << i, count + 1, size) {
            return Some(found);
        }
        // Distances only shrink as edges are added, so if even every
        // remaining candidate cannot rescue this branch, skipping `i` is dead.
        let rest = if i + 1 >= 32 { 0 } else { (!0u32) << (i + 1) & mask_of(c) };
        if self.valid(chosen | rest) {
            return self.find(i + 1, chosen, count, size);
        }
        None
    }
}

fn mask_of(c: usize) -> u32 {
    if c >= 32 {
        !0
    } else {
        (1u32 << c) - 1
    }
}

/// Minimum `|E(H)| / |V|` over simple graphs `H` whose edges join vertices at
/// `g`-distance at most `L` and in which every edge of `g` spans distance at
/// most `L`. Sizes are tried upwards from the forest bound
/// `n - #components`, so the first valid subset found is optimal.
pub fn exact_cl(g: &Graph, l: usize) -> Result<ExactRewiring, RewiringError> {
    if l == 0 {
        return Err(RewiringError::ZeroLipschitz);
    }
    let n = g.vertex_count();
    let mut candidates = Vec::new();
    for u in 0..n {
        for (v, _) in g.bfs_within(u, l) {
            if v > u {
                candidates.push((u, v));
            }
        }
    }
    candidates.sort_unstable();
    if candidates.len() > MAX_EXACT_CANDIDATES {
        return Err(RewiringError::TooLarge {
            candidates: candidates.len(),
            limit: MAX_EXACT_CANDIDATES,
        });
    }
    let base: Vec<(usize, usize)> = g.simplified().edges().iter().copied().filter(|(u, v)| u != v).collect();
    let search = Search {
        n,
        l,
        candidates,
        base,
    };
    let lower = n - g.connected_components().len();
    let upper = search.base.len();
    for size in lower..=upper {
        if let Some(mask) = search.find(0, 0, 0, size) {
            let edges = search
                .candidates
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e);
            let rewired = Graph::from_edges(n, edges)?;
            return Ok(ExactRewiring {
                density: edge_density(&rewired),
                rewired,
            });
        }
    }
    unreachable!("the simple graph underlying g is always a valid rewiring")
}
