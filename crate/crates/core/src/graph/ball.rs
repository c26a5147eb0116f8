use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Coloring, Graph, GraphError, Vertex};

/// Generator label of an edge. `ascending` records that the generator maps
/// the smaller endpoint to the larger one; loops use `ascending = true`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeLabel {
    pub generator: u32,
    pub ascending: bool,
}

/// A graph whose edges carry generator labels, such as a Schreier graph.
/// `labels[i]` belongs to `graph.edges()[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub labels: Vec<EdgeLabel>,
}

impl LabeledGraph {
    /// Builds from directed arcs `(from, to, generator)`.
    pub fn from_arcs(
        n: usize,
        arcs: impl IntoIterator<Item = (Vertex, Vertex, u32)>,
        degree_bound: usize,
    ) -> Result<Self, GraphError> {
        let mut keyed: Vec<((Vertex, Vertex), EdgeLabel)> = arcs
            .into_iter()
            .map(|(a, b, generator)| {
                (
                    (a.min(b), a.max(b)),
                    EdgeLabel {
                        generator,
                        ascending: a <= b,
                    },
                )
            })
            .collect();
        keyed.sort_unstable();
        let graph = Graph::new(n, keyed.iter().map(|(e, _)| *e), degree_bound)?;
        Ok(LabeledGraph {
            graph,
            labels: keyed.into_iter().map(|(_, l)| l).collect(),
        })
    }
}

/// An edge of a [`RootedBall`]. Labeled edges are oriented `a -> b`
/// (the generator maps `a` to `b`); unlabeled edges have `a <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BallEdge {
    pub a: usize,
    pub b: usize,
    pub generator: Option<u32>,
}

/// Optional decorations carried into a ball.
#[derive(Debug, Clone, Copy, Default)]
pub struct BallDecorations<'a> {
    pub colors: Option<&'a Coloring>,
    pub labels: Option<&'a [EdgeLabel]>,
    /// Edges of this graph (on the same vertex set) with both endpoints in the
    /// ball become the ball's distinguished edges.
    pub distinguished: Option<&'a Graph>,
}

/// A connected rooted graph of bounded radius with optional vertex colors,
/// edge labels and a distinguished edge multiset. Vertex 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RootedBall {
    radius: usize,
    depth: Vec<usize>,
    edges: Vec<BallEdge>,
    colors: Option<Vec<u32>>,
    distinguished: Option<Vec<(usize, usize)>>,
}

/// Reason a set of parts does not form a [`RootedBall`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum BallShapeError {
    Empty,
    EdgeOutOfRange,
    ColorLength,
    ZeroColor,
    TooFar,
}

impl RootedBall {
    /// Validated constructor: vertex 0 is the root and every vertex must lie
    /// within `radius` of it along (non-distinguished) edges.
    pub(crate) fn from_parts(
        radius: usize,
        vertex_count: usize,
        mut edges: Vec<BallEdge>,
        colors: Option<Vec<u32>>,
        distinguished: Option<Vec<(usize, usize)>>,
    ) -> Result<Self, BallShapeError> {
        if vertex_count == 0 {
            return Err(BallShapeError::Empty);
        }
        if edges.iter().any(|e| e.a >= vertex_count || e.b >= vertex_count) {
            return Err(BallShapeError::EdgeOutOfRange);
        }
        if let Some(d) = &distinguished {
            if d.iter().any(|&(a, b)| a >= vertex_count || b >= vertex_count) {
                return Err(BallShapeError::EdgeOutOfRange);
            }
        }
        if let Some(c) = &colors {
            if c.len() != vertex_count {
                return Err(BallShapeError::ColorLength);
            }
            if c.contains(&0) {
                return Err(BallShapeError::ZeroColor);
            }
        }
        for e in &mut edges {
            if e.generator.is_none() && e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
            }
        }
        edges.sort_unstable();
        let distinguished = distinguished.map(|mut d| {
            for p in &mut d {
                *p = (p.0.min(p.1), p.0.max(p.1));
            }
            d.sort_unstable();
            d
        });
        let depth = depths(vertex_count, &edges, 0);
        if depth.iter().any(|d| d.is_none_or(|d| d > radius)) {
            return Err(BallShapeError::TooFar);
        }
        Ok(RootedBall {
            radius,
            depth: depth.into_iter().map(Option::unwrap).collect(),
            edges,
            colors,
            distinguished,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn vertex_count(&self) -> usize {
        self.depth.len()
    }

    /// Distance of `v` from the root.
    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    pub fn edges(&self) -> &[BallEdge] {
        &self.edges
    }

    pub fn colors(&self) -> Option<&[u32]> {
        self.colors.as_deref()
    }

    pub fn distinguished(&self) -> Option<&[(usize, usize)]> {
        self.distinguished.as_deref()
    }

    pub fn root_color(&self) -> Option<u32> {
        self.colors.as_ref().map(|c| c[0])
    }

    pub fn is_labeled(&self) -> bool {
        self.edges.iter().any(|e| e.generator.is_some())
    }

    /// Distinct neighbours of every vertex along ball edges (loops skipped).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        adjacency(self.vertex_count(), &self.edges)
    }

    pub fn without_colors(&self) -> RootedBall {
        RootedBall {
            colors: None,
            ..self.clone()
        }
    }

    pub fn without_distinguished(&self) -> RootedBall {
        RootedBall {
            distinguished: None,
            ..self.clone()
        }
    }

    /// Replaces the vertex colors. Panics if the length is wrong.
    pub fn with_colors(&self, colors: Vec<u32>) -> RootedBall {
        assert_eq!(colors.len(), self.vertex_count());
        RootedBall {
            colors: Some(colors),
            ..self.clone()
        }
    }

    /// Number of distinguished edges at the root, loops counted twice.
    pub fn distinguished_root_degree(&self) -> usize {
        self.distinguished.as_ref().map_or(0, |d| {
            d.iter()
                .map(|&(a, b)| (a == 0) as usize + (b == 0) as usize)
                .sum()
        })
    }

    /// The sub-ball of vertices within distance `r` of the root.
    pub fn restrict(&self, r: usize) -> RootedBall {
        let keep: Vec<usize> = (0..self.vertex_count())
            .filter(|&v| self.depth[v] <= r)
            .collect();
        self.induced(&keep, r)
    }

    /// The ball of radius `r` around `v`, measured inside this ball, with `v`
    /// as the new root.
    pub fn reroot(&self, v: usize, r: usize) -> RootedBall {
        let adj = self.adjacency();
        let mut dist = vec![usize::MAX; self.vertex_count()];
        dist[v] = 0;
        let mut order = vec![v];
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            if dist[u] == r {
                continue;
            }
            for &w in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    order.push(w);
                }
            }
        }
        self.induced(&order, r)
    }

    /// Induced sub-ball on `keep` (first entry becomes the root).
    fn induced(&self, keep: &[usize], r: usize) -> RootedBall {
        let mut index = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| index[e.a] != usize::MAX && index[e.b] != usize::MAX)
            .map(|e| BallEdge {
                a: index[e.a],
                b: index[e.b],
                generator: e.generator,
            })
            .collect();
        let colors = self
            .colors
            .as_ref()
            .map(|c| keep.iter().map(|&v| c[v]).collect());
        let distinguished = self.distinguished.as_ref().map(|d| {
            d.iter()
                .filter(|&&(a, b)| index[a] != usize::MAX && index[b] != usize::MAX)
                .map(|&(a, b)| (index[a], index[b]))
                .collect()
        });
        RootedBall::from_parts(r, keep.len(), edges, colors, distinguished)
            .expect("induced sub-ball of a ball is a ball")
    }
}

fn adjacency(n: usize, edges: &[BallEdge]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for e in edges {
        if e.a != e.b {
            adj[e.a].push(e.b);
            adj[e.b].push(e.a);
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    adj
}

fn depths(n: usize, edges: &[BallEdge], root: usize) -> Vec<Option<usize>> {
    let adj = adjacency(n, edges);
    let mut dist = vec![None; n];
    dist[root] = Some(0);
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if dist[w].is_none() {
                dist[w] = Some(dist[u].unwrap() + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// The radius-`r` ball around `v`: the subgraph induced on vertices at
/// distance at most `r`, rooted at `v`, with the decorations restricted to it.
/// Ball vertices are numbered in BFS order.
pub fn ball(
    g: &Graph,
    v: Vertex,
    r: usize,
    deco: BallDecorations<'_>,
) -> Result<RootedBall, GraphError> {
    g.check_vertex(v)?;
    if let Some(c) = deco.colors {
        if c.len() != g.vertex_count() {
            return Err(GraphError::VertexCountMismatch {
                left: g.vertex_count(),
                right: c.len(),
            });
        }
    }
    if let Some(labels) = deco.labels {
        if labels.len() != g.edge_count() {
            return Err(GraphError::LabelCountMismatch {
                labels: labels.len(),
                edges: g.edge_count(),
            });
        }
    }
    if let Some(h) = deco.distinguished {
        if h.vertex_count() != g.vertex_count() {
            return Err(GraphError::VertexCountMismatch {
                left: g.vertex_count(),
                right: h.vertex_count(),
            });
        }
    }

    let members = g.bfs_within(v, r);
    let index: HashMap<Vertex, usize> = members
        .iter()
        .enumerate()
        .map(|(i, &(w, _))| (w, i))
        .collect();

    let mut edges = Vec::new();
    for &(u, _) in &members {
        for &eid in g.incident_edges(u) {
            let (a, b) = g.edges()[eid];
            if a != u {
                continue;
            }
            let Some(&ib) = index.get(&b) else { continue };
            let ia = index[&a];
            let edge = match deco.labels.map(|l| l[eid]) {
                None => BallEdge {
                    a: ia,
                    b: ib,
                    generator: None,
                },
                Some(lab) if lab.ascending => BallEdge {
                    a: ia,
                    b: ib,
                    generator: Some(lab.generator),
                },
                Some(lab) => BallEdge {
                    a: ib,
                    b: ia,
                    generator: Some(lab.generator),
                },
            };
            edges.push(edge);
        }
    }

    let colors = deco
        .colors
        .map(|c| members.iter().map(|&(w, _)| c.color(w)).collect());

    let distinguished = deco.distinguished.map(|h| {
        let mut d = Vec::new();
        for &(u, _) in &members {
            for &eid in h.incident_edges(u) {
                let (a, b) = h.edges()[eid];
                if a != u {
                    continue;
                }
                if let Some(&ib) = index.get(&b) {
                    d.push((index[&a], ib));
                }
            }
        }
        d
    });

    Ok(RootedBall::from_parts(r, members.len(), edges, colors, distinguished)
        .expect("BFS ball is connected within its radius"))
}

#[cfg(test)]
mod tests {
    use super::super::families::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cycle_ball_is_a_rooted_path() {
        let b = ball(&cycle(6), 2, 1, BallDecorations::default()).unwrap();
        assert_eq!(b.vertex_count(), 3);
        assert_eq!(b.edges().len(), 2);
        assert_eq!(b.depth(0), 0);
    }

    #[test]
    fn star_ball_at_center() {
        let b = ball(&star(3), 0, 1, BallDecorations::default()).unwrap();
        assert_eq!(b.vertex_count(), 4);
        assert_eq!(b.edges().len(), 3);
    }

    #[test]
    fn petersen_radius_two_covers_everything() {
        let g = petersen();
        for v in 0..10 {
            let b = ball(&g, v, 2, BallDecorations::default()).unwrap();
            assert_eq!(b.vertex_count(), 1 + 3 + 6);
            assert_eq!(b.edges().len(), 15);
        }
    }

    #[test]
    fn invalid_vertex() {
        assert!(matches!(
            ball(&cycle(4), 9, 1, BallDecorations::default()),
            Err(GraphError::VertexOutOfRange { vertex: 9, n: 4 })
        ));
    }

    #[test]
    fn decorations_are_restricted() {
        let g = cycle(6);
        let colors = Coloring::new(vec![1, 2, 1, 2, 1, 2], 2).unwrap();
        let h = Graph::from_edges(6, [(0, 2), (2, 4), (0, 3)]).unwrap();
        let b = ball(
            &g,
            0,
            2,
            BallDecorations {
                colors: Some(&colors),
                distinguished: Some(&h),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(b.colors().unwrap()[0], 1);
        // (0,3) leaves the ball: vertex 3 is at distance 3.
        assert_eq!(b.distinguished().unwrap().len(), 2);
        assert_eq!(b.distinguished_root_degree(), 1);
    }

    #[test]
    fn labeled_arcs_keep_orientation() {
        // 3-cycle with generator 0 acting as i -> i+1.
        let lg = LabeledGraph::from_arcs(3, (0..3).map(|i| (i, (i + 1) % 3, 0)), 2).unwrap();
        let b = ball(
            &lg.graph,
            0,
            1,
            BallDecorations {
                labels: Some(&lg.labels),
                ..Default::default()
            },
        )
        .unwrap();
        // Root 0 has one outgoing and one incoming labeled edge.
        let out = b.edges().iter().filter(|e| e.a == 0).count();
        let inc = b.edges().iter().filter(|e| e.b == 0).count();
        assert_eq!((out, inc), (1, 1));
    }

    proptest! {
        #[test]
        fn restriction_matches_smaller_ball(n in 1usize..30, r in 0usize..4, seed in any::<u64>()) {
            let g = random_bounded_degree(n, 3, 2 * n, seed);
            for v in 0..n {
                let big = ball(&g, v, r + 1, BallDecorations::default()).unwrap();
                let small = ball(&g, v, r, BallDecorations::default()).unwrap();
                prop_assert_eq!(big.restrict(r), small);
            }
        }
    }
}
