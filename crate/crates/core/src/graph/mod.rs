//! Finite bounded-degree multigraphs and the structural queries the rest of
//! the crate is built on.
//!
//! Distances ignore edge multiplicity and loops never shorten a path. Every
//! traversal visits neighbours in increasing vertex order so that results are
//! reproducible.

mod ball;
mod canon;
mod coloring;
pub mod families;
mod io;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ball::{ball, BallDecorations, BallEdge, EdgeLabel, LabeledGraph, RootedBall};
pub use canon::{canonical_code, CanonicalCode, CodeError};
pub use coloring::{power_distance_coloring, Coloring, ColoringError, DistanceColoring};
pub use io::{parse_graph, write_graph};

pub type Vertex = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("vertex {vertex} has degree {degree}, exceeding the bound {bound}")]
    DegreeBound {
        vertex: usize,
        degree: usize,
        bound: usize,
    },
    #[error("degree bound must be positive")]
    ZeroDegreeBound,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graphs have different vertex counts ({left} vs {right})")]
    VertexCountMismatch { left: usize, right: usize },
    #[error("{labels} edge labels for {edges} edges")]
    LabelCountMismatch { labels: usize, edges: usize },
    #[error("graph has no vertices")]
    Empty,
}

/// A finite multigraph on vertices `0..n` with an explicit degree bound.
///
/// Edges are stored as sorted pairs `(u, v)` with `u <= v`; a loop `(u, u)`
/// contributes 2 to the degree of `u`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    degree_bound: usize,
    // Derived data; always a function of `edges`.
    neighbors: Vec<Vec<Vertex>>,
    incident: Vec<Vec<usize>>,
    degree: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    degree_bound: usize,
    edges: Vec<(Vertex, Vertex)>,
}

impl TryFrom<GraphRepr> for Graph {
    type Error = GraphError;

    fn try_from(r: GraphRepr) -> Result<Self, Self::Error> {
        Graph::new(r.n, r.edges, r.degree_bound)
    }
}

impl From<Graph> for GraphRepr {
    fn from(g: Graph) -> Self {
        GraphRepr {
            n: g.n,
            degree_bound: g.degree_bound,
            edges: g.edges,
        }
    }
}

impl Graph {
    /// Builds a graph, validating vertex ids and the degree bound.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
        degree_bound: usize,
    ) -> Result<Self, GraphError> {
        if degree_bound == 0 {
            return Err(GraphError::ZeroDegreeBound);
        }
        let g = Self::build(n, edges)?;
        if let Some((vertex, &degree)) = g.degree.iter().enumerate().find(|(_, &d)| d > degree_bound) {
            return Err(GraphError::DegreeBound {
                vertex,
                degree,
                bound: degree_bound,
            });
        }
        Ok(Graph { degree_bound, ..g })
    }

    /// Builds a graph whose degree bound is its maximum degree (at least 1).
    pub fn from_edges(
        n: usize,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Result<Self, GraphError> {
        let g = Self::build(n, edges)?;
        let degree_bound = g.max_degree().max(1);
        Ok(Graph { degree_bound, ..g })
    }

    fn build(
        n: usize,
        edges: impl IntoIterator<Item = (Vertex, Vertex)>,
    ) -> Result<Self, GraphError> {
        let mut list = Vec::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: x, n });
                }
            }
            list.push((u.min(v), u.max(v)));
        }
        list.sort_unstable();

        let mut neighbors = vec![Vec::new(); n];
        let mut incident = vec![Vec::new(); n];
        let mut degree = vec![0; n];
        for (id, &(u, v)) in list.iter().enumerate() {
            degree[u] += 1;
            degree[v] += 1;
            incident[u].push(id);
            if u != v {
                incident[v].push(id);
                neighbors[u].push(v);
                neighbors[v].push(u);
            }
        }
        for nb in &mut neighbors {
            nb.sort_unstable();
            nb.dedup();
        }
        Ok(Graph {
            n,
            edges: list,
            degree_bound: 1,
            neighbors,
            incident,
            degree,
        })
    }

    /// Returns a copy with a different degree bound.
    pub fn with_degree_bound(&self, degree_bound: usize) -> Result<Self, GraphError> {
        Graph::new(self.n, self.edges.iter().copied(), degree_bound)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Edges in sorted order, each as `(u, v)` with `u <= v`.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    /// Degree counting multiplicity, loops twice.
    pub fn degree(&self, v: Vertex) -> usize {
        self.degree[v]
    }

    pub fn max_degree(&self) -> usize {
        self.degree.iter().copied().max().unwrap_or(0)
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let first = *self.degree.first()?;
        self.degree.iter().all(|&d| d == first).then_some(first)
    }

    /// Distinct neighbours other than `v` itself, ascending.
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.neighbors[v]
    }

    /// Ids (into [`Graph::edges`]) of edges incident to `v`; a loop is listed once.
    pub fn incident_edges(&self, v: Vertex) -> &[usize] {
        &self.incident[v]
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<(), GraphError> {
        if v < self.n {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex: v,
                n: self.n,
            })
        }
    }

    /// Number of simple edges: distinct unordered pairs of distinct vertices.
    pub fn simple_edge_count(&self) -> usize {
        let mut pairs: Vec<_> = self.edges.iter().filter(|(u, v)| u != v).collect();
        pairs.dedup();
        pairs.len()
    }

    /// The underlying simple graph: loops dropped, parallel edges merged.
    pub fn simplified(&self) -> Graph {
        let mut pairs: Vec<_> = self.edges.iter().copied().filter(|(u, v)| u != v).collect();
        pairs.dedup();
        Graph::new(self.n, pairs, self.degree_bound).expect("simplification cannot raise degrees")
    }

    /// Breadth-first distances from `src`; `None` marks unreachable vertices.
    pub fn distances_from(&self, src: Vertex) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &w in &self.neighbors[u] {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Vertices within distance `radius` of `src` in BFS order (ties by
    /// increasing id), paired with their distance.
    pub fn bfs_within(&self, src: Vertex, radius: usize) -> Vec<(Vertex, usize)> {
        let mut seen = std::collections::HashMap::new();
        seen.insert(src, 0usize);
        let mut order = vec![(src, 0)];
        let mut head = 0;
        while head < order.len() {
            let (u, du) = order[head];
            head += 1;
            if du == radius {
                continue;
            }
            for &w in &self.neighbors[u] {
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(w) {
                    e.insert(du + 1);
                    order.push((w, du + 1));
                }
            }
        }
        order
    }

    /// Shortest-path distance, or `None` if `u` and `v` lie in different components.
    pub fn distance(&self, u: Vertex, v: Vertex) -> Option<usize> {
        self.distance_at_most(u, v, usize::MAX)
    }

    /// Distance between `u` and `v` if it is at most `limit`.
    pub fn distance_at_most(&self, u: Vertex, v: Vertex, limit: usize) -> Option<usize> {
        if u == v {
            return Some(0);
        }
        let mut dist = std::collections::HashMap::new();
        dist.insert(u, 0usize);
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[&x];
            if dx >= limit {
                break;
            }
            for &w in &self.neighbors[x] {
                if w == v {
                    return Some(dx + 1);
                }
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(dx + 1);
                    queue.push_back(w);
                }
            }
        }
        None
    }

    /// Component id of every vertex; ids are assigned in order of the
    /// smallest vertex of each component.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &w in &self.neighbors[u] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Connected components as sorted vertex lists, ordered by smallest vertex.
    pub fn connected_components(&self) -> Vec<Vec<Vertex>> {
        let labels = self.component_labels();
        let count = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut blocks = vec![Vec::new(); count];
        for (v, &c) in labels.iter().enumerate() {
            blocks[c].push(v);
        }
        blocks
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.connected_components().len() == 1
    }

    /// Length of a shortest cycle; `None` for forests. A loop is a cycle of
    /// length 1 and a parallel pair one of length 2.
    pub fn girth(&self) -> Option<usize> {
        if self.edges.iter().any(|(u, v)| u == v) {
            return Some(1);
        }
        if self.edges.windows(2).any(|w| w[0] == w[1]) {
            return Some(2);
        }
        let mut best: Option<usize> = None;
        let mut dist = vec![usize::MAX; self.n];
        let mut parent = vec![usize::MAX; self.n];
        for root in 0..self.n {
            let mut touched = vec![root];
            dist[root] = 0;
            let mut queue = VecDeque::from([root]);
            'bfs: while let Some(u) = queue.pop_front() {
                if let Some(b) = best {
                    if 2 * dist[u] + 1 >= b {
                        break 'bfs;
                    }
                }
                for &w in &self.neighbors[u] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[u] + 1;
                        parent[w] = u;
                        touched.push(w);
                        queue.push_back(w);
                    } else if parent[u] != w {
                        let len = dist[u] + dist[w] + 1;
                        best = Some(best.map_or(len, |b| b.min(len)));
                    }
                }
            }
            for v in touched {
                dist[v] = usize::MAX;
                parent[v] = usize::MAX;
            }
        }
        best
    }

    /// Applies a vertex permutation: vertex `v` becomes `perm[v]`.
    pub fn relabeled(&self, perm: &[Vertex]) -> Result<Graph, GraphError> {
        if perm.len() != self.n {
            return Err(GraphError::VertexCountMismatch {
                left: self.n,
                right: perm.len(),
            });
        }
        Graph::new(
            self.n,
            self.edges.iter().map(|&(u, v)| (perm[u], perm[v])),
            self.degree_bound,
        )
    }

    /// Disjoint union; vertices of `other` are shifted by `self.vertex_count()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n;
        let edges = self
            .edges
            .iter()
            .copied()
            .chain(other.edges.iter().map(|&(u, v)| (u + shift, v + shift)));
        Graph::new(
            self.n + other.n,
            edges,
            self.degree_bound.max(other.degree_bound),
        )
        .expect("union of valid graphs is valid")
    }

    /// Multiplicity of every distinct edge, in sorted order.
    pub fn edge_multiplicities(&self) -> Vec<((Vertex, Vertex), usize)> {
        let mut out: Vec<((Vertex, Vertex), usize)> = Vec::new();
        for &e in &self.edges {
            match out.last_mut() {
                Some((last, count)) if *last == e => *count += 1,
                _ => out.push((e, 1)),
            }
        }
        out
    }
}
