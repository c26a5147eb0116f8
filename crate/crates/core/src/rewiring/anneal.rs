//! Simulated annealing over valid rewirings, minimizing the edge count.
//!
//! Every state visited is a valid `L`-rewiring of `g`: added edges join
//! vertices at `g`-distance at most `L`, and a deletion is only applied after
//! the base edges it could affect have been rechecked.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{is_rewiring, RewiringCertificate, RewiringError};
use crate::graph::Graph;

#[derive(Debug, Clone)]
pub struct AnnealOptions {
    /// Proposals per Lipschitz level.
    pub budget: usize,
    pub seed: u64,
    /// Defaults to `1 / ln 2`, at which a move adding one edge is accepted
    /// half the time.
    pub initial_temperature: Option<f64>,
    /// Geometric cooling factor applied after every sweep.
    pub cooling: f64,
    /// Run levels `2..=L` in turn, each starting from the previous result.
    /// A rewiring valid for `L - 1` is valid for `L`, so densities are then
    /// non-increasing in `L`.
    pub warm_start: bool,
}

impl Default for AnnealOptions {
    fn default() -> Self {
        AnnealOptions {
            budget: 20_000,
            seed: 0,
            initial_temperature: None,
            cooling: 0.995,
            warm_start: true,
        }
    }
}

pub fn optimize_rewiring(
    g: &Graph,
    l: usize,
    budget: usize,
    seed: u64,
) -> Result<(Graph, RewiringCertificate), RewiringError> {
    optimize_rewiring_with(
        g,
        l,
        &AnnealOptions {
            budget,
            seed,
            ..Default::default()
        },
    )
}

pub fn optimize_rewiring_with(
    g: &Graph,
    l: usize,
    opts: &AnnealOptions,
) -> Result<(Graph, RewiringCertificate), RewiringError> {
    if l == 0 {
        return Err(RewiringError::ZeroLipschitz);
    }
    if opts.budget == 0 {
        return Err(RewiringError::ZeroBudget);
    }
    // Parallel edges and loops never shorten a path, so the simple graph
    // underlying `g` is a valid starting point at every level.
    let mut edges: Vec<(usize, usize)> = g.simplified().edges().to_vec();
    let levels: Vec<usize> = if opts.warm_start { (2..=l).collect() } else if l >= 2 { vec![l] } else { vec![] };
    for level in levels {
        let mut state = State::new(g, level, &edges);
        let seed = opts.seed.wrapping_add(level as u64);
        edges = state.anneal(opts, &mut ChaCha8Rng::seed_from_u64(seed));
    }
    let h = Graph::from_edges(g.vertex_count(), edges)?;
    let cert = is_rewiring(g, &h, l)?;
    debug_assert!(cert.valid);
    Ok((h, cert))
}

struct State {
    l: usize,
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    position: HashMap<(usize, usize), usize>,
    base_edges: Vec<(usize, usize)>,
    base_incident: Vec<Vec<usize>>,
    candidates: Vec<(usize, usize)>,
    stamp: Vec<u32>,
    depth: Vec<usize>,
    epoch: u32,
    queue: Vec<usize>,
}

impl State {
    fn new(g: &Graph, l: usize, start: &[(usize, usize)]) -> Self {
        let n = g.vertex_count();
        let base_edges: Vec<(usize, usize)> = g.simplified().edges().iter().copied().filter(|(u, v)| u != v).collect();
        let mut base_incident = vec![Vec::new(); n];
        for (i, &(u, v)) in base_edges.iter().enumerate() {
            base_incident[u].push(i);
            base_incident[v].push(i);
        }
        let mut candidates = Vec::new();
        for u in 0..n {
            for (v, _) in g.bfs_within(u, l) {
                if v > u {
                    candidates.push((u, v));
                }
            }
        }
        candidates.sort_unstable();
        let mut s = State {
            l,
            adj: vec![Vec::new(); n],
            edges: Vec::new(),
            position: HashMap::new(),
            base_edges,
            base_incident,
            candidates,
            stamp: vec![0; n],
            depth: vec![0; n],
            epoch: 0,
            queue: Vec::new(),
        };
        for &(u, v) in start {
            if u != v {
                s.insert((u.min(v), u.max(v)));
            }
        }
        s
    }

    fn contains(&self, e: (usize, usize)) -> bool {
        self.position.contains_key(&e)
    }

    fn insert(&mut self, e: (usize, usize)) {
        if self.contains(e) {
            return;
        }
        self.position.insert(e, self.edges.len());
        self.edges.push(e);
        let (u, v) = e;
        let i = self.adj[u].binary_search(&v).unwrap_err();
        self.adj[u].insert(i, v);
        let i = self.adj[v].binary_search(&u).unwrap_err();
        self.adj[v].insert(i, u);
    }

    fn remove(&mut self, e: (usize, usize)) {
        let Some(i) = self.position.remove(&e) else { return };
        self.edges.swap_remove(i);
        if i < self.edges.len() {
            self.position.insert(self.edges[i], i);
        }
        let (u, v) = e;
        if let Ok(j) = self.adj[u].binary_search(&v) {
            self.adj[u].remove(j);
        }
        if let Ok(j) = self.adj[v].binary_search(&u) {
            self.adj[v].remove(j);
        }
    }

    /// Vertices within `radius` of `src` in the current rewiring, skipping
    /// edge `banned`; stops early once `target` is reached.
    fn bfs(&mut self, src: usize, radius: usize, banned: Option<(usize, usize)>, target: Option<usize>) -> bool {
        self.epoch += 1;
        self.queue.clear();
        self.queue.push(src);
        self.stamp[src] = self.epoch;
        self.depth[src] = 0;
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            if Some(u) == target {
                return true;
            }
            if self.depth[u] == radius {
                continue;
            }
            for idx in 0..self.adj[u].len() {
                let w = self.adj[u][idx];
                if banned == Some((u.min(w), u.max(w))) || self.stamp[w] == self.epoch {
                    continue;
                }
                self.stamp[w] = self.epoch;
                self.depth[w] = self.depth[u] + 1;
                self.queue.push(w);
            }
        }
        false
    }

    /// Whether removing `e` keeps every base edge within distance `L`.
    fn can_delete(&mut self, e: (usize, usize)) -> bool {
        let mut affected: Vec<usize> = Vec::new();
        for end in [e.0, e.1] {
            self.bfs(end, self.l, None, None);
            affected.extend_from_slice(&self.queue);
        }
        affected.sort_unstable();
        affected.dedup();
        let mut to_check: Vec<usize> = affected
            .iter()
            .flat_map(|&x| self.base_incident[x].iter().copied())
            .collect();
        to_check.sort_unstable();
        to_check.dedup();
        to_check.into_iter().all(|i| {
            let (x, y) = self.base_edges[i];
            self.bfs(x, self.l, Some(e), Some(y))
        })
    }

    fn try_delete(&mut self, e: (usize, usize)) -> bool {
        if self.can_delete(e) {
            self.remove(e);
            true
        } else {
            false
        }
    }

    fn random_absent_candidate(&self, rng: &mut ChaCha8Rng) -> Option<(usize, usize)> {
        if self.candidates.is_empty() {
            return None;
        }
        for _ in 0..16 {
            let c = self.candidates[rng.random_range(0..self.candidates.len())];
            if !self.contains(c) {
                return Some(c);
            }
        }
        None
    }

    /// Adds `s`, then tries to delete a few nearby edges; returns the edges
    /// actually deleted.
    fn compound(&mut self, s: (usize, usize), rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
        self.insert(s);
        let mut nearby: Vec<(usize, usize)> = Vec::new();
        for end in [s.0, s.1] {
            self.bfs(end, 1, None, None);
            for &x in &self.queue {
                for &y in &self.adj[x] {
                    let e = (x.min(y), x.max(y));
                    if e != s {
                        nearby.push(e);
                    }
                }
            }
        }
        nearby.sort_unstable();
        nearby.dedup();
        nearby.shuffle(rng);
        let mut deleted = Vec::new();
        for e in nearby.into_iter().take(8) {
            if deleted.len() == 2 {
                break;
            }
            if self.try_delete(e) {
                deleted.push(e);
            }
        }
        deleted
    }

    fn anneal(&mut self, opts: &AnnealOptions, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
        let mut temperature = opts.initial_temperature.unwrap_or(1.0 / std::f64::consts::LN_2);
        let mut best = self.sorted_edges();
        let mut proposals = 0;
        while proposals < opts.budget {
            let sweep = self.edges.len().max(1);
            for _ in 0..sweep {
                if proposals >= opts.budget {
                    break;
                }
                proposals += 1;
                let choice: f64 = rng.random();
                if choice < 0.5 {
                    if self.edges.is_empty() {
                        continue;
                    }
                    let e = self.edges[rng.random_range(0..self.edges.len())];
                    self.try_delete(e);
                } else if choice < 0.75 {
                    if let Some(c) = self.random_absent_candidate(rng) {
                        if rng.random::<f64>() < (-1.0 / temperature).exp() {
                            self.insert(c);
                        }
                    }
                } else if let Some(c) = self.random_absent_candidate(rng) {
                    let deleted = self.compound(c, rng);
                    let delta = 1.0 - deleted.len() as f64;
                    let accept = delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp();
                    if !accept {
                        for e in deleted {
                            self.insert(e);
                        }
                        self.remove(c);
                    }
                }
                if self.edges.len() < best.len() {
                    best = self.sorted_edges();
                }
            }
            temperature *= opts.cooling;
        }
        self.reset_to(&best);
        self.greedy_prune(rng);
        self.sorted_edges()
    }

    fn reset_to(&mut self, edges: &[(usize, usize)]) {
        for e in self.sorted_edges() {
            self.remove(e);
        }
        for &e in edges {
            self.insert(e);
        }
    }

    fn greedy_prune(&mut self, rng: &mut ChaCha8Rng) {
        loop {
            let mut order = self.sorted_edges();
            order.shuffle(rng);
            let mut changed = false;
            for e in order {
                changed |= self.try_delete(e);
            }
            if !changed {
                return;
            }
        }
    }

    fn sorted_edges(&self) -> Vec<(usize, usize)> {
        let mut e = self.edges.clone();
        e.sort_unstable();
        e
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;
    use crate::rewiring::edge_density;

    #[test]
    fn cycles_and_trees_are_already_optimal() {
        for l in 1..4 {
            // A spanning tree of C_n with chords of length <= L would lift
            // every cycle edge to a displacement of size at most L^2, which
            // cannot wind once around when n > L^2 + 1.
            let n = l * l + 2;
            let (h, cert) = optimize_rewiring(&cycle(n), l, 2000, 1).unwrap();
            assert!(cert.valid);
            assert_eq!(h.edge_count(), n);
            let tree = random_bounded_degree(15, 3, 40, 2);
            let tree = crate::graph::Graph::new(15, {
                // spanning forest of the random graph via BFS parents
                let mut parent = vec![usize::MAX; 15];
                let mut out = Vec::new();
                for s in 0..15 {
                    if parent[s] != usize::MAX {
                        continue;
                    }
                    parent[s] = s;
                    let mut queue = vec![s];
                    while let Some(u) = queue.pop() {
                        for &w in tree.neighbors(u) {
                            if parent[w] == usize::MAX {
                                parent[w] = u;
                                out.push((u, w));
                                queue.push(w);
                            }
                        }
                    }
                }
                out
            }, 3)
            .unwrap();
            let (h, cert) = optimize_rewiring(&tree, l, 2000, 1).unwrap();
            assert!(cert.valid);
            assert_eq!(h.edge_count(), tree.edge_count());
        }
    }

    #[test]
    fn torus_gets_sparser() {
        let (h, cert) = optimize_rewiring(&torus(4, 4), 3, 20_000, 7).unwrap();
        assert!(cert.valid && cert.revalidate());
        assert!(edge_density(&h) < 2.0);
    }

    #[test]
    fn deterministic_and_monotone_in_l() {
        let g = random_bounded_degree(30, 3, 80, 3);
        let mut last = f64::INFINITY;
        for l in 1..=4 {
            let (a, _) = optimize_rewiring(&g, l, 3000, 5).unwrap();
            let (b, _) = optimize_rewiring(&g, l, 3000, 5).unwrap();
            assert_eq!(a, b);
            let d = edge_density(&a);
            assert!(d <= last);
            last = d;
            let floor = (g.vertex_count() - g.connected_components().len()) as f64 / g.vertex_count() as f64;
            assert!(d >= floor);
            assert_eq!(a.component_labels(), g.component_labels());
        }
    }

    #[test]
    fn zero_budget_is_an_error() {
        assert!(optimize_rewiring(&cycle(5), 2, 0, 0).is_err());
    }
}
