//! Balanced almost-invariant partitions: `k` blocks of near-equal size with
//! few vertices reachable from a block but outside it.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::spectral::laplacian_embedding;
use crate::graph::{Coloring, Graph};
use crate::schreier::SchreierGraph;

/// The step structure a partition is measured against. For a plain graph a
/// step goes to any neighbour; for a Schreier graph it applies one
/// generator (not its inverse).
#[derive(Debug, Clone)]
pub struct StepGraph {
    steps: Vec<Vec<usize>>,
    reverse: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    graph: Graph,
    generators: Option<usize>,
}

impl StepGraph {
    pub fn from_graph(g: &Graph) -> Self {
        let steps: Vec<Vec<usize>> = (0..g.vertex_count()).map(|v| g.neighbors(v).to_vec()).collect();
        Self::build(steps, g.edges().to_vec(), g.clone(), None)
    }

    pub fn from_schreier(s: &SchreierGraph) -> Self {
        let n = s.n();
        let g = s.generator_count();
        let steps: Vec<Vec<usize>> = (0..n).map(|c| (0..g).map(|i| s.permutation(i)[c]).collect()).collect();
        let edges = (0..n)
            .flat_map(|c| (0..g).map(move |i| (c, i)))
            .map(|(c, i)| (c, s.permutation(i)[c]))
            .collect();
        Self::build(steps, edges, s.to_graph(), Some(g))
    }

    fn build(steps: Vec<Vec<usize>>, edges: Vec<(usize, usize)>, graph: Graph, generators: Option<usize>) -> Self {
        let mut reverse = vec![Vec::new(); steps.len()];
        for (x, ys) in steps.iter().enumerate() {
            for &y in ys {
                reverse[y].push(x);
            }
        }
        StepGraph {
            steps,
            reverse,
            edges,
            graph,
            generators,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.steps.len()
    }

    /// Edges counted by the boundary: one per Schreier edge, or the
    /// multigraph's edges.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Number of generators for Schreier input.
    pub fn generator_count(&self) -> Option<usize> {
        self.generators
    }

    /// Largest number of step sources of one vertex.
    pub fn max_in_steps(&self) -> usize {
        self.reverse.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub k: usize,
    pub assignment: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
    pub block_fractions: Vec<f64>,
    /// Edges whose endpoints lie in different blocks.
    pub boundary_edges: Vec<(usize, usize)>,
    /// Sum over blocks of the vertices one step outside the block.
    pub boundary_vertex_sum: usize,
    pub boundary_fraction: f64,
}

impl Partition {
    pub fn from_assignment(sg: &StepGraph, k: usize, assignment: Vec<usize>) -> Self {
        let n = sg.vertex_count();
        assert_eq!(assignment.len(), n);
        assert!(assignment.iter().all(|&b| b < k.max(1)));
        let mut blocks = vec![Vec::new(); k];
        for (v, &b) in assignment.iter().enumerate() {
            blocks[b].push(v);
        }
        let boundary_edges = sg
            .edges()
            .iter()
            .copied()
            .filter(|&(u, v)| assignment[u] != assignment[v])
            .collect();
        let boundary_vertex_sum = boundary_vertex_sum(sg, &assignment, k);
        Partition {
            k,
            block_fractions: blocks.iter().map(|b| b.len() as f64 / n as f64).collect(),
            boundary_fraction: boundary_vertex_sum as f64 / n as f64,
            assignment,
            blocks,
            boundary_edges,
            boundary_vertex_sum,
        }
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }
}

/// `sum_i |S A_i \ A_i|`, computed directly from the definition.
pub fn boundary_vertex_sum(sg: &StepGraph, assignment: &[usize], k: usize) -> usize {
    let mut total = 0;
    let mut seen = vec![usize::MAX; sg.vertex_count()];
    for block in 0..k {
        for (x, ys) in sg.steps.iter().enumerate() {
            if assignment[x] != block {
                continue;
            }
            for &y in ys {
                if assignment[y] != block && seen[y] != block {
                    seen[y] = block;
                    total += 1;
                }
            }
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionStatus {
    /// Both conditions hold for the returned partition.
    Holds,
    /// The best partition found within the budget violates a condition;
    /// a better partition may exist.
    NotFoundWithinBudget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionVerdict {
    pub epsilon: f64,
    /// `1/k - eps <= |A_i| / |V| <= 1/k + eps` for every block.
    pub sizes_ok: bool,
    /// `sum_i |S A_i \ A_i| < eps |V|`.
    pub boundary_ok: bool,
    pub status: PartitionStatus,
}

impl PartitionVerdict {
    pub fn evaluate(p: &Partition, epsilon: f64) -> Self {
        let n = p.assignment.len();
        let (lo, hi) = size_window(n, p.k, epsilon);
        let sizes_ok = p.blocks.iter().all(|b| (lo..=hi).contains(&b.len()));
        let boundary_ok = (p.boundary_vertex_sum as f64) < epsilon * n as f64;
        PartitionVerdict {
            epsilon,
            sizes_ok,
            boundary_ok,
            status: if sizes_ok && boundary_ok {
                PartitionStatus::Holds
            } else {
                PartitionStatus::NotFoundWithinBudget
            },
        }
    }

    pub fn holds(&self) -> bool {
        self.status == PartitionStatus::Holds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionResult {
    pub partition: Partition,
    pub verdict: PartitionVerdict,
    pub candidates: usize,
    pub evaluations: usize,
}

/// Block sizes allowed by `eps`, with a little slack for rounding.
fn size_window(n: usize, k: usize, eps: f64) -> (usize, usize) {
    let n_f = n as f64;
    let k_f = k.max(1) as f64;
    let lo = ((1.0 / k_f - eps) * n_f - 1e-9).ceil().max(0.0) as usize;
    let hi = (((1.0 / k_f + eps) * n_f + 1e-9).floor() as usize).min(n);
    (lo, hi)
}

/// Searches for a partition into `k` blocks with sizes in the `eps` window
/// and few boundary vertices. Candidates come from spectral sweeps and
/// capacity-constrained k-means on the Laplacian embedding; each is refined
/// by Kernighan–Lin style passes. `budget` caps move evaluations. Ties are
/// broken towards the lexicographically smallest canonical assignment.
pub fn balanced_partition(sg: &StepGraph, k: usize, eps: f64, budget: usize, seed: u64) -> PartitionResult {
    let n = sg.vertex_count();
    let k = k.max(1);
    if k == 1 || n == 0 {
        let partition = Partition::from_assignment(sg, k, vec![0; n]);
        let verdict = PartitionVerdict::evaluate(&partition, eps);
        return PartitionResult {
            partition,
            verdict,
            candidates: 1,
            evaluations: 0,
        };
    }
    let (lo, hi) = size_window(n, k, eps);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = k.clamp(2, 16).min(n - 1).max(1);
    let embedding = laplacian_embedding(sg.graph(), dims, rng.random());

    let mut starts: Vec<Vec<usize>> = Vec::new();
    // Equal chunks of the order along each of the first eigenvectors.
    #[allow(clippy::needless_range_loop)]
    for axis in 0..dims.min(2) {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| embedding[a][axis].total_cmp(&embedding[b][axis]).then(a.cmp(&b)));
        let mut assign = vec![0; n];
        for (rank, &v) in order.iter().enumerate() {
            assign[v] = rank * k / n;
        }
        starts.push(assign);
    }
    for _ in 0..4 {
        starts.push(balanced_kmeans(&embedding, k, &mut rng));
    }

    let mut evaluations = 0;
    let per_candidate = budget / (starts.len() + 1).max(1);
    let mut best: Option<(usize, usize, Vec<usize>)> = None;
    let candidates = starts.len() + usize::from(k == 2);
    let consider = |assign: Vec<usize>, best: &mut Option<(usize, usize, Vec<usize>)>| {
        let assign = canonical_labels(&assign, k);
        let sizes = block_sizes(&assign, k);
        let violation: usize = sizes.iter().map(|&s| lo.saturating_sub(s) + s.saturating_sub(hi)).sum();
        let bvs = boundary_vertex_sum(sg, &assign, k);
        let key = (violation, bvs);
        if best.as_ref().is_none_or(|(v, b, a)| key < (*v, *b) || (key == (*v, *b) && assign < *a)) {
            *best = Some((violation, bvs, assign));
        }
    };
    if k == 2 {
        let (assign, used) = fiedler_sweep(sg, &embedding, lo, hi);
        evaluations += used;
        let mut r = Refiner::new(sg, k, assign, lo, hi);
        evaluations += r.refine(per_candidate, &mut rng);
        consider(r.assign, &mut best);
    }
    for start in starts {
        let mut r = Refiner::new(sg, k, start, lo, hi);
        evaluations += r.refine(per_candidate, &mut rng);
        consider(r.assign, &mut best);
    }
    let (_, _, assign) = best.expect("at least one candidate");
    let partition = Partition::from_assignment(sg, k, assign);
    let verdict = PartitionVerdict::evaluate(&partition, eps);
    PartitionResult {
        partition,
        verdict,
        candidates,
        evaluations,
    }
}

fn block_sizes(assign: &[usize], k: usize) -> Vec<usize> {
    let mut sizes = vec![0; k];
    for &b in assign {
        sizes[b] += 1;
    }
    sizes
}

/// Relabels blocks in order of first appearance.
fn canonical_labels(assign: &[usize], k: usize) -> Vec<usize> {
    let mut map = vec![usize::MAX; k];
    let mut next = 0;
    assign
        .iter()
        .map(|&b| {
            if map[b] == usize::MAX {
                map[b] = next;
                next += 1;
            }
            map[b]
        })
        .collect()
}

/// Best prefix split of the Fiedler order with the first block's size in
/// `lo..=hi`.
fn fiedler_sweep(sg: &StepGraph, embedding: &[Vec<f64>], lo: usize, hi: usize) -> (Vec<usize>, usize) {
    let n = sg.vertex_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| embedding[a][0].total_cmp(&embedding[b][0]).then(a.cmp(&b)));
    let lo = lo.max(1).min(n - 1);
    let hi = hi.max(lo).min(n - 1);
    let mut assign = vec![1; n];
    for &v in &order[..lo] {
        assign[v] = 0;
    }
    // The window is on both blocks; moving vertices one by one keeps both
    // sizes legal only inside the intersection.
    let mut r = Refiner::new(sg, 2, assign, 0, n);
    let mut best = (r.bvs, lo);
    let mut evaluations = 0;
    for (i, &v) in order.iter().enumerate().take(hi).skip(lo) {
        r.apply(v, 0);
        evaluations += 1;
        let size0 = i + 1;
        if n - size0 >= lo && r.bvs < best.0 {
            best = (r.bvs, size0);
        }
    }
    let mut assign = vec![1; n];
    for &v in &order[..best.1] {
        assign[v] = 0;
    }
    (assign, evaluations)
}

/// k-means++ seeding, then Lloyd iterations whose assignment step fills
/// clusters greedily by distance up to equal capacities.
fn balanced_kmeans(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = points.len();
    let d = points[0].len();
    let dist2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
    let mut centers: Vec<Vec<f64>> = vec![points[rng.random_range(0..n)].clone()];
    while centers.len() < k {
        let weights: Vec<f64> = points
            .iter()
            .map(|p| centers.iter().map(|c| dist2(p, c)).fold(f64::INFINITY, f64::min))
            .collect();
        let next = match WeightedIndex::new(&weights) {
            Ok(w) => w.sample(rng),
            Err(_) => rng.random_range(0..n),
        };
        centers.push(points[next].clone());
    }
    let capacity: Vec<usize> = (0..k).map(|c| n / k + usize::from(c < n % k)).collect();
    let mut assign = vec![0; n];
    for _ in 0..30 {
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * k);
        for (v, p) in points.iter().enumerate() {
            for (c, center) in centers.iter().enumerate() {
                pairs.push((dist2(p, center), v, c));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut fill = vec![0; k];
        let mut done = vec![false; n];
        let mut next = vec![0; n];
        for (_, v, c) in pairs {
            if !done[v] && fill[c] < capacity[c] {
                done[v] = true;
                fill[c] += 1;
                next[v] = c;
            }
        }
        let changed = next != assign;
        assign = next;
        let mut sums = vec![vec![0.0; d]; k];
        for (v, &c) in assign.iter().enumerate() {
            sums[c].iter_mut().zip(&points[v]).for_each(|(s, x)| *s += x);
        }
        for (c, s) in sums.into_iter().enumerate() {
            centers[c] = s.into_iter().map(|x| x / fill[c].max(1) as f64).collect();
        }
        if !changed {
            break;
        }
    }
    assign
}

/// Incremental boundary-vertex bookkeeping for single-vertex moves.
struct Refiner<'a> {
    sg: &'a StepGraph,
    k: usize,
    assign: Vec<usize>,
    sizes: Vec<usize>,
    /// `count[b * n + y]`: steps into `y` from vertices of block `b`.
    count: Vec<u32>,
    bvs: usize,
    lo: usize,
    hi: usize,
    scratch: Vec<usize>,
}

impl<'a> Refiner<'a> {
    fn new(sg: &'a StepGraph, k: usize, assign: Vec<usize>, lo: usize, hi: usize) -> Self {
        let n = sg.vertex_count();
        let mut count = vec![0u32; k * n];
        for (x, ys) in sg.steps.iter().enumerate() {
            for &y in ys {
                count[assign[x] * n + y] += 1;
            }
        }
        let sizes = block_sizes(&assign, k);
        let mut r = Refiner {
            sg,
            k,
            assign,
            sizes,
            count,
            bvs: 0,
            lo,
            hi,
            scratch: Vec::new(),
        };
        r.bvs = (0..n).map(|y| r.contribution(y)).sum();
        r
    }

    fn contribution(&self, y: usize) -> usize {
        let n = self.sg.vertex_count();
        (0..self.k)
            .filter(|&b| b != self.assign[y] && self.count[b * n + y] > 0)
            .count()
    }

    fn affected(&mut self, v: usize) -> Vec<usize> {
        let mut a = std::mem::take(&mut self.scratch);
        a.clear();
        a.push(v);
        a.extend_from_slice(&self.sg.steps[v]);
        a.sort_unstable();
        a.dedup();
        a
    }

    /// Moves `v` to block `to`, updating the boundary sum.
    fn apply(&mut self, v: usize, to: usize) {
        let n = self.sg.vertex_count();
        let from = self.assign[v];
        if from == to {
            return;
        }
        let affected = self.affected(v);
        let before: usize = affected.iter().map(|&y| self.contribution(y)).sum();
        for &y in &self.sg.steps[v] {
            self.count[from * n + y] -= 1;
            self.count[to * n + y] += 1;
        }
        self.assign[v] = to;
        self.sizes[from] -= 1;
        self.sizes[to] += 1;
        let after: usize = affected.iter().map(|&y| self.contribution(y)).sum();
        self.bvs = self.bvs + after - before;
        self.scratch = affected;
    }

    fn legal(&self, v: usize, to: usize) -> bool {
        let from = self.assign[v];
        // Never make a size violation worse.
        let from_ok = self.sizes[from] > self.lo || self.sizes[from] > self.hi;
        let to_ok = self.sizes[to] < self.hi || self.sizes[to] < self.lo;
        from != to && from_ok && to_ok
    }

    /// Blocks of `v`'s step neighbours in either direction, other than its own.
    fn targets(&self, v: usize) -> Vec<usize> {
        let mut t: Vec<usize> = self.sg.steps[v]
            .iter()
            .chain(&self.sg.reverse[v])
            .map(|&y| self.assign[y])
            .filter(|&b| b != self.assign[v])
            .collect();
        t.sort_unstable();
        t.dedup();
        t
    }

    /// Gain (decrease of the boundary sum) of moving `v` to `to`.
    fn gain(&mut self, v: usize, to: usize) -> i64 {
        let from = self.assign[v];
        let before = self.bvs as i64;
        self.apply(v, to);
        let after = self.bvs as i64;
        self.apply(v, from);
        before - after
    }

    /// Kernighan–Lin passes: repeatedly take the best legal move of an
    /// unlocked boundary vertex (even if it worsens the objective), lock it,
    /// and roll back to the best prefix. Returns evaluations used.
    fn refine(&mut self, budget: usize, rng: &mut ChaCha8Rng) -> usize {
        let n = self.sg.vertex_count();
        let mut used = 0;
        const PATIENCE: usize = 40;
        while used < budget {
            let start = self.bvs;
            let mut locked = vec![false; n];
            let mut moves: Vec<(usize, usize)> = Vec::new();
            let (mut best, mut best_len) = (self.bvs, 0);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(rng);
            while used < budget && moves.len() < best_len + PATIENCE {
                let mut choice: Option<(i64, usize, usize)> = None;
                for &v in &order {
                    if locked[v] {
                        continue;
                    }
                    for to in self.targets(v) {
                        if !self.legal(v, to) {
                            continue;
                        }
                        used += 1;
                        let g = self.gain(v, to);
                        if choice.is_none_or(|(cg, _, _)| g > cg) {
                            choice = Some((g, v, to));
                        }
                    }
                }
                let Some((_, v, to)) = choice else { break };
                moves.push((v, self.assign[v]));
                self.apply(v, to);
                locked[v] = true;
                if self.bvs < best {
                    best = self.bvs;
                    best_len = moves.len();
                }
            }
            while moves.len() > best_len {
                let (v, from) = moves.pop().expect("nonempty");
                self.apply(v, from);
            }
            if self.bvs >= start {
                break;
            }
        }
        used
    }
}

/// A seeded balanced `k`-partition of `g` as a coloring, for use as a probe
/// coloring. `None` for `k = 0` or an empty graph.
pub fn partition_coloring(g: &Graph, k: usize, seed: u64) -> Option<Coloring> {
    if k == 0 || g.vertex_count() == 0 {
        return None;
    }
    let sg = StepGraph::from_graph(g);
    let r = balanced_partition(&sg, k, 0.5 / k as f64, 20_000, seed);
    Coloring::new(r.partition.assignment.iter().map(|&b| b as u32 + 1).collect(), k as u32).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::{cycle, petersen, random_bounded_degree, torus};
    use rand::Rng;
    use crate::schreier::builtin_family;
    use proptest::prelude::*;

    #[test]
    fn cycle_two_arcs() {
        let sg = StepGraph::from_graph(&cycle(1000));
        let r = balanced_partition(&sg, 2, 0.01, 50_000, 1);
        assert_eq!(r.partition.boundary_vertex_sum, 4);
        assert_eq!(r.partition.boundary_edges.len(), 2);
        assert!(r.verdict.holds());
    }

    #[test]
    fn torus_quadrants_matched() {
        let f = builtin_family("Z2-torus", &[16], 0).unwrap();
        let sg = StepGraph::from_schreier(&f.graphs[0]);
        let r = balanced_partition(&sg, 4, 0.05, 50_000, 2);
        // Quadrants: each 8 x 8 block has 8 + 8 one-step exits.
        assert!(r.partition.boundary_vertex_sum <= 64, "{}", r.partition.boundary_vertex_sum);
        assert!(r.verdict.sizes_ok);
    }

    #[test]
    fn single_block() {
        let sg = StepGraph::from_graph(&petersen());
        let r = balanced_partition(&sg, 1, 0.1, 100, 0);
        assert_eq!(r.partition.boundary_vertex_sum, 0);
        assert!(r.partition.boundary_edges.is_empty());
        assert!(r.verdict.holds());
    }

    #[test]
    fn coloring_probe() {
        let c = partition_coloring(&torus(6, 6), 3, 4).unwrap();
        assert_eq!(c.color_count(), 3);
        assert_eq!(c.len(), 36);
        assert!(partition_coloring(&torus(3, 3), 0, 0).is_none());
    }

    #[test]
    fn refiner_tracks_boundary() {
        let g = random_bounded_degree(40, 3, 200, 5);
        let sg = StepGraph::from_graph(&g);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let assign: Vec<usize> = (0..40).map(|_| rng.random_range(0..3)).collect();
        let mut r = Refiner::new(&sg, 3, assign, 0, 40);
        for _ in 0..200 {
            let v = rng.random_range(0..40);
            let to = rng.random_range(0..3);
            r.apply(v, to);
            assert_eq!(r.bvs, boundary_vertex_sum(&sg, &r.assign, 3));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn double_counting(seed in any::<u64>(), k in 1usize..5) {
            let g = random_bounded_degree(30, 3, 120, seed);
            let sg = StepGraph::from_graph(&g);
            let r = balanced_partition(&sg, k, 0.1, 2_000, seed);
            let p = &r.partition;
            prop_assert!(p.boundary_vertex_sum <= 2 * p.boundary_edges.len());
            prop_assert!(p.boundary_edges.len() <= g.max_degree().max(1) * p.boundary_vertex_sum);
            let covered: usize = p.blocks.iter().map(Vec::len).sum();
            prop_assert_eq!(covered, 30);
        }

        #[test]
        fn double_counting_schreier(seed in any::<u64>(), k in 1usize..5) {
            let f = builtin_family("F2-random", &[24], seed).unwrap();
            let sg = StepGraph::from_schreier(&f.graphs[0]);
            let r = balanced_partition(&sg, k, 0.1, 2_000, seed);
            let p = &r.partition;
            // With one-sided steps each boundary edge exits at most once.
            prop_assert!(p.boundary_vertex_sum <= p.boundary_edges.len());
            prop_assert!(p.boundary_edges.len() <= 2 * p.boundary_vertex_sum);
        }
    }
}
