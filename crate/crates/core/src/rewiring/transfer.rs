//! Transferring a rewiring from one graph to another through local types.
//!
//! With `r = L^2 + 1` and `R = 2r`, every vertex `v` of the source graph gets
//! a type: its `R`-ball colored by a distance-`2R` coloring `eta` (so colors
//! are injective on every `R`-ball), with the edges of the source rewiring
//! inside the ball marked as distinguished, plus a flag recording that every
//! base edge at the root is spanned by a short distinguished path. The
//! distribution of colored `r`-balls of the type coloring is modeled on the
//! target graph; each target vertex then reads its asserted type, recovers
//! `eta` from the type's root color, and, if its surroundings agree with the
//! assertion, emits the distinguished root edges through the color matching.
//! Vertices whose surroundings disagree are problematic and keep all their
//! base edges. Remaining violations mark further vertices problematic until
//! the result certifies.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use super::{edge_density, is_rewiring, rewiring_violations, RewiringCertificate, RewiringError};
use crate::graph::{ball, power_distance_coloring, BallDecorations, CanonicalCode, Coloring, Graph, RootedBall};
use crate::stats::{colored_neighborhood_distribution, model_coloring_with, ModelOptions};

#[derive(Debug, Clone)]
pub struct TransferOptions {
    /// Candidate recolorings evaluated while modeling the type distribution.
    pub budget: usize,
    pub seed: u64,
    /// Random restarts of the modeling search, besides the index-wrapped
    /// copy of the source type coloring.
    pub restarts: usize,
}

impl Default for TransferOptions {
    fn default() -> Self {
        TransferOptions {
            budget: 20_000,
            seed: 0,
            restarts: 2,
        }
    }
}

/// Type of a source vertex: the code of its decorated `R`-ball and whether
/// the decorations witness the Lipschitz bound at the root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct TypeColor {
    pub code: CanonicalCode,
    pub witness: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferReport {
    #[serde(rename = "L")]
    pub lipschitz: usize,
    pub r: usize,
    #[serde(rename = "R")]
    pub big_r: usize,
    pub eta_colors: u32,
    pub type_count: usize,
    /// Total-variation distance between the type statistics of the source
    /// and those of the modeled coloring of the target.
    pub model_tv: f64,
    pub initially_problematic: usize,
    pub problematic: usize,
    pub problematic_fraction: f64,
    pub patch_rounds: usize,
    pub decoded_edges: usize,
    pub density_source: f64,
    pub density_result: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferOutcome {
    pub rewired: Graph,
    pub certificate: RewiringCertificate,
    pub report: TransferReport,
    /// Modeled type coloring of the target (type `i` is color `i + 1`).
    pub type_coloring: Coloring,
    pub types: Vec<TypeColor>,
}

/// Whether every base edge at the root has a distinguished path of length
/// at most `l` inside the ball.
fn witness_flag(b: &RootedBall, l: usize) -> bool {
    let m = b.vertex_count();
    let mut adj = vec![Vec::new(); m];
    for &(a, c) in b.distinguished().unwrap_or(&[]) {
        adj[a].push(c);
        adj[c].push(a);
    }
    let mut dist = vec![usize::MAX; m];
    dist[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        if dist[u] == l {
            continue;
        }
        for &w in &adj[u] {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    b.edges()
        .iter()
        .filter(|e| e.a != e.b && (e.a == 0 || e.b == 0))
        .all(|e| dist[e.a.max(e.b)] <= l)
}

struct TypeData {
    witness: bool,
    ball: RootedBall,
    plain_code: CanonicalCode,
    restricted_code: CanonicalCode,
    vertex_of_color: HashMap<u32, usize>,
    /// Codes of the `r`-balls around vertices within `L` of the root,
    /// measured inside the type ball.
    rerooted: HashMap<usize, CanonicalCode>,
}

struct Decoded {
    perfect: bool,
    emitted: Vec<(usize, usize)>,
}

pub fn transfer_rewiring(
    g1: &Graph,
    h1: &Graph,
    g2: &Graph,
    l: usize,
    opts: &TransferOptions,
) -> Result<TransferOutcome, RewiringError> {
    let input = is_rewiring(g1, h1, l)?;
    if !input.valid {
        let w = input.witness.expect("invalid certificates carry a witness");
        return Err(RewiringError::InvalidInput(format!(
            "edge ({}, {}) of the {:?} graph is too long",
            w.u, w.v, w.side
        )));
    }
    if g2.vertex_count() == 0 {
        return Err(crate::graph::GraphError::Empty.into());
    }
    let r = l * l + 1;
    let big_r = 2 * r;
    let n1 = g1.vertex_count();
    let n2 = g2.vertex_count();

    let eta = power_distance_coloring(g1, 2 * big_r);
    let raw: Vec<TypeColor> = (0..n1)
        .into_par_iter()
        .map(|v| {
            let b = ball(
                g1,
                v,
                big_r,
                BallDecorations {
                    colors: Some(&eta.coloring),
                    distinguished: Some(h1),
                    ..Default::default()
                },
            )?;
            Ok(TypeColor {
                witness: witness_flag(&b, l),
                code: b.canonical_code(),
            })
        })
        .collect::<Result<_, RewiringError>>()?;
    let types: Vec<TypeColor> = raw.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let index: HashMap<&TypeColor, u32> = types.iter().enumerate().map(|(i, t)| (t, i as u32 + 1)).collect();
    let source_types = Coloring::new(raw.iter().map(|t| index[t]).collect(), types.len() as u32)?;

    let data: Vec<TypeData> = types
        .par_iter()
        .map(|t| {
            let b = t.code.decode().expect("type codes come from the encoder");
            let colors = b.colors().expect("types are colored").to_vec();
            let rerooted = (0..b.vertex_count())
                .filter(|&j| b.depth(j) <= l)
                .map(|j| (j, b.reroot(j, r).canonical_code()))
                .collect();
            TypeData {
                witness: t.witness,
                plain_code: b.without_distinguished().canonical_code(),
                restricted_code: b.restrict(r).canonical_code(),
                vertex_of_color: colors.iter().enumerate().map(|(j, &c)| (c, j)).collect(),
                rerooted,
                ball: b,
            }
        })
        .collect();

    let goal = colored_neighborhood_distribution(g1, r, &source_types)?;
    let wrapped = Coloring::new((0..n2).map(|i| source_types.color(i % n1)).collect(), types.len() as u32)?;
    let model = model_coloring_with(
        g2,
        &goal,
        &ModelOptions {
            budget: opts.budget,
            restarts: opts.restarts,
            seed: opts.seed,
            initial: vec![wrapped],
            ..Default::default()
        },
    )?;
    let psi = &model.coloring;
    let type_of = |x: usize| &data[psi.color(x) as usize - 1];

    let eta2 = Coloring::new(
        (0..n2).map(|x| type_of(x).ball.root_color().expect("colored type")).collect(),
        eta.colors_used,
    )?;

    let decoded: Vec<Decoded> = (0..n2)
        .into_par_iter()
        .map(|x| {
            let t = type_of(x);
            let fail = Decoded {
                perfect: false,
                emitted: Vec::new(),
            };
            if !t.witness {
                return fail;
            }
            let b2 = ball(
                g2,
                x,
                big_r,
                BallDecorations {
                    colors: Some(&eta2),
                    ..Default::default()
                },
            )
            .expect("vertex in range");
            if b2.canonical_code() != t.plain_code {
                return fail;
            }
            // Equal codes and injective type colors make the color matching
            // the unique isomorphism between the two balls.
            let members = g2.bfs_within(x, big_r);
            let mut vertex_of_color = HashMap::with_capacity(members.len());
            for &(y, depth) in &members {
                vertex_of_color.insert(eta2.color(y), y);
                if depth <= l {
                    let j = t.vertex_of_color[&eta2.color(y)];
                    if t.rerooted[&j] != type_of(y).restricted_code {
                        return fail;
                    }
                }
            }
            let colors = t.ball.colors().expect("colored type");
            let emitted = t
                .ball
                .distinguished()
                .unwrap_or(&[])
                .iter()
                .filter(|&&(a, b)| a != b && (a == 0 || b == 0))
                .map(|&(a, b)| {
                    let y = vertex_of_color[&colors[a.max(b)]];
                    (x.min(y), x.max(y))
                })
                .collect();
            Decoded { perfect: true, emitted }
        })
        .collect();

    let mut problematic: Vec<bool> = decoded.iter().map(|d| !d.perfect).collect();
    let initially_problematic = problematic.iter().filter(|&&p| p).count();
    let base: Vec<(usize, usize)> = g2.simplified().edges().iter().copied().filter(|(u, v)| u != v).collect();
    let mut rounds = 0;
    let (rewired, decoded_edges) = loop {
        let mut edges = BTreeSet::new();
        let mut decoded_edges = BTreeSet::new();
        for (x, d) in decoded.iter().enumerate() {
            if !problematic[x] {
                decoded_edges.extend(d.emitted.iter().copied());
            }
        }
        edges.extend(decoded_edges.iter().copied());
        for &(u, v) in &base {
            if problematic[u] || problematic[v] {
                edges.insert((u, v));
            }
        }
        let h2 = Graph::from_edges(n2, edges)?;
        let violations = rewiring_violations(g2, &h2, l)?;
        if violations.is_empty() {
            break (h2, decoded_edges.len());
        }
        for v in violations {
            problematic[v.u] = true;
            problematic[v.v] = true;
        }
        rounds += 1;
    };

    let certificate = is_rewiring(g2, &rewired, l)?;
    let problematic_count = problematic.iter().filter(|&&p| p).count();
    let report = TransferReport {
        lipschitz: l,
        r,
        big_r,
        eta_colors: eta.colors_used,
        type_count: types.len(),
        model_tv: model.achieved_tv,
        initially_problematic,
        problematic: problematic_count,
        problematic_fraction: problematic_count as f64 / n2 as f64,
        patch_rounds: rounds,
        decoded_edges,
        density_source: edge_density(h1),
        density_result: edge_density(&rewired),
    };
    Ok(TransferOutcome {
        rewired,
        certificate,
        report,
        type_coloring: model.coloring,
        types,
    })
}
