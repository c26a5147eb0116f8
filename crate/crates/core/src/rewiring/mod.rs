//! Bi-Lipschitz rewirings: certification, density accounting, search for
//! sparse rewirings, and transfer of a rewiring between graphs with similar
//! neighbourhood statistics.

mod anneal;
mod exact;
mod transfer;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{ColoringError, Graph, GraphError, Vertex};
use crate::stats::StatsError;

pub use anneal::{optimize_rewiring, optimize_rewiring_with, AnnealOptions};
pub use exact::{exact_cl, ExactRewiring, MAX_EXACT_CANDIDATES};
pub use transfer::{transfer_rewiring, TransferOptions, TransferOutcome, TransferReport, TypeColor};

#[derive(Debug, Error)]
pub enum RewiringError {
    #[error("graphs have different vertex counts ({base} vs {rewired})")]
    VertexMismatch { base: usize, rewired: usize },
    #[error("Lipschitz constant must be positive")]
    ZeroLipschitz,
    #[error("search budget must be positive")]
    ZeroBudget,
    #[error("empty graph sequence")]
    EmptySequence,
    #[error("{candidates} candidate edges exceed the exact search limit of {limit}")]
    TooLarge { candidates: usize, limit: usize },
    #[error("input is not a valid rewiring: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Coloring(#[from] ColoringError),
}

/// Which graph the violating pair is an edge of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeSide {
    Base,
    Rewired,
}

/// An edge of one graph whose endpoints are farther than `L` apart in the other.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub u: Vertex,
    pub v: Vertex,
    pub side: EdgeSide,
    /// Distance in the other graph; `None` when it exceeds `L` (the search
    /// is depth-limited) or the endpoints are disconnected.
    pub distance: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RewiringCertificate {
    pub base: Graph,
    pub rewired: Graph,
    #[serde(rename = "L")]
    pub lipschitz: usize,
    pub valid: bool,
    pub witness: Option<Violation>,
}

impl RewiringCertificate {
    /// Recomputes the verdict with unrestricted breadth-first search from
    /// every vertex, independently of the depth-limited check.
    pub fn revalidate(&self) -> bool {
        full_bfs_valid(&self.base, &self.rewired, self.lipschitz)
    }
}

fn check_pair(g: &Graph, h: &Graph, l: usize) -> Result<(), RewiringError> {
    if l == 0 {
        return Err(RewiringError::ZeroLipschitz);
    }
    if g.vertex_count() != h.vertex_count() {
        return Err(RewiringError::VertexMismatch {
            base: g.vertex_count(),
            rewired: h.vertex_count(),
        });
    }
    Ok(())
}

fn side_violations<'a>(
    edges_of: &'a Graph,
    metric: &'a Graph,
    l: usize,
    side: EdgeSide,
) -> impl Iterator<Item = Violation> + 'a {
    let mut last = None;
    edges_of.edges().iter().filter_map(move |&(u, v)| {
        if u == v || last == Some((u, v)) {
            return None;
        }
        last = Some((u, v));
        match metric.distance_at_most(u, v, l) {
            Some(_) => None,
            None => Some(Violation {
                u,
                v,
                side,
                distance: None,
            }),
        }
    })
}

/// Every violating edge: base edges first, then rewired edges, each in
/// sorted order.
pub fn rewiring_violations(g: &Graph, h: &Graph, l: usize) -> Result<Vec<Violation>, RewiringError> {
    check_pair(g, h, l)?;
    Ok(side_violations(g, h, l, EdgeSide::Base)
        .chain(side_violations(h, g, l, EdgeSide::Rewired))
        .collect())
}

/// Checks that every edge of `g` spans distance at most `l` in `h` and vice
/// versa. The witness is the first violation in the order of
/// [`rewiring_violations`].
pub fn is_rewiring(g: &Graph, h: &Graph, l: usize) -> Result<RewiringCertificate, RewiringError> {
    check_pair(g, h, l)?;
    let mut witness = side_violations(g, h, l, EdgeSide::Base).next();
    if witness.is_none() {
        witness = side_violations(h, g, l, EdgeSide::Rewired).next();
    }
    if let Some(w) = &mut witness {
        let metric = if w.side == EdgeSide::Base { h } else { g };
        w.distance = metric.distance(w.u, w.v);
    }
    Ok(RewiringCertificate {
        base: g.clone(),
        rewired: h.clone(),
        lipschitz: l,
        valid: witness.is_none(),
        witness,
    })
}

fn full_bfs_valid(g: &Graph, h: &Graph, l: usize) -> bool {
    if g.vertex_count() != h.vertex_count() || l == 0 {
        return false;
    }
    let n = g.vertex_count();
    let dg: Vec<Vec<Option<usize>>> = (0..n).map(|v| g.distances_from(v)).collect();
    let dh: Vec<Vec<Option<usize>>> = (0..n).map(|v| h.distances_from(v)).collect();
    let ok = |edges: &[(usize, usize)], d: &[Vec<Option<usize>>]| {
        edges.iter().all(|&(u, v)| d[u][v].is_some_and(|x| x <= l))
    };
    ok(g.edges(), &dh) && ok(h.edges(), &dg)
}

/// `|E| / |V|`, counting parallel edges and loops; 0 for the empty graph.
pub fn edge_density(g: &Graph) -> f64 {
    if g.vertex_count() == 0 {
        0.0
    } else {
        g.edge_count() as f64 / g.vertex_count() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub densities: Vec<f64>,
    pub running_min: Vec<f64>,
    /// Minimum over the second half of the sequence (indices `len/2..`),
    /// standing in for the lower limit of an infinite sequence.
    pub liminf_proxy: f64,
}

impl DensityReport {
    pub fn from_densities(densities: Vec<f64>) -> Result<Self, RewiringError> {
        if densities.is_empty() {
            return Err(RewiringError::EmptySequence);
        }
        let mut running_min = Vec::with_capacity(densities.len());
        let mut m = f64::INFINITY;
        for &d in &densities {
            m = m.min(d);
            running_min.push(m);
        }
        let liminf_proxy = densities[densities.len() / 2..]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        Ok(DensityReport {
            densities,
            running_min,
            liminf_proxy,
        })
    }
}

pub fn density_report(hs: &[Graph]) -> Result<DensityReport, RewiringError> {
    DensityReport::from_densities(hs.iter().map(edge_density).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::families::*;

    fn without_edge(g: &Graph, e: (usize, usize)) -> Graph {
        Graph::new(
            g.vertex_count(),
            g.edges().iter().copied().filter(|&x| x != e),
            g.degree_bound(),
        )
        .unwrap()
    }

    #[test]
    fn identity_is_valid() {
        let g = petersen();
        let cert = is_rewiring(&g, &g, 1).unwrap();
        assert!(cert.valid && cert.revalidate());
    }

    #[test]
    fn cut_cycle() {
        let g = cycle(6);
        let h = without_edge(&g, (0, 5));
        let cert = is_rewiring(&g, &h, 4).unwrap();
        assert!(!cert.valid && !cert.revalidate());
        let w = cert.witness.unwrap();
        assert_eq!((w.u, w.v, w.side, w.distance), (0, 5, EdgeSide::Base, Some(5)));
        let cert = is_rewiring(&g, &h, 5).unwrap();
        assert!(cert.valid && cert.revalidate());
    }

    #[test]
    fn long_chord_is_rejected() {
        let g = cycle(8);
        let mut edges = g.edges().to_vec();
        edges.push((0, 3));
        let h = Graph::from_edges(8, edges).unwrap();
        let cert = is_rewiring(&g, &h, 2).unwrap();
        assert!(!cert.valid);
        assert_eq!(cert.witness.unwrap().side, EdgeSide::Rewired);
        assert!(is_rewiring(&g, &h, 3).unwrap().valid);
        assert!(is_rewiring(&g, &cycle(7), 2).is_err());
        assert!(is_rewiring(&g, &g, 0).is_err());
    }

    #[test]
    fn densities() {
        assert_eq!(edge_density(&cycle(9)), 1.0);
        assert_eq!(edge_density(&torus(5, 5)), 2.0);
        assert_eq!(edge_density(&complete(4)), 1.5);
        let graphs: Vec<Graph> = [8usize, 6, 5, 11]
            .iter()
            .map(|&m| Graph::from_edges(4, complete(4).edges()[..m.min(6)].to_vec()).unwrap())
            .collect();
        let report = density_report(&graphs).unwrap();
        assert_eq!(report.densities, vec![1.5, 1.5, 1.25, 1.5]);
        assert_eq!(report.running_min, vec![1.5, 1.5, 1.25, 1.25]);
        assert_eq!(report.liminf_proxy, 1.25);
        assert_eq!(density_report(&[cycle(3)]).unwrap().liminf_proxy, 1.0);
        assert!(density_report(&[]).is_err());
        let report = DensityReport::from_densities(vec![2.0, 1.5, 1.2, 1.1]).unwrap();
        assert_eq!(report.liminf_proxy, 1.1);
        assert_eq!(report.running_min, vec![2.0, 1.5, 1.2, 1.1]);
    }
}
