//! Canonical codes for decorated rooted balls.
//!
//! The code of a ball is the lexicographically smallest encoding over all
//! labelings reachable by individualization-refinement: vertices start in
//! cells keyed by (distance from root, color), cells are refined by the
//! multiset of (neighbour cell, edge kind) pairs until stable, and ties are
//! broken by individualizing each vertex of the first non-singleton cell in
//! turn. Automorphisms discovered at equal leaves prune sibling branches that
//! lie in the same orbit of the stabilizer of the current prefix.

use std::fmt;

use base64::Engine;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::ball::{BallEdge, RootedBall};

const CODE_VERSION: u8 = 1;
const FLAG_COLORS: u8 = 1;
const FLAG_DISTINGUISHED: u8 = 2;

const KIND_PLAIN: u32 = 0;
const KIND_DISTINGUISHED: u32 = 1;

/// Byte string identifying a [`RootedBall`] up to isomorphism fixing the root
/// and preserving colors, labels (with orientation) and distinguished edges.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(Vec<u8>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeError {
    #[error("canonical code is truncated")]
    Truncated,
    #[error("unsupported canonical code version {0}")]
    Version(u8),
    #[error("canonical code has trailing bytes")]
    Trailing,
    #[error("malformed canonical code: {0}")]
    Malformed(&'static str),
    #[error("invalid base64: {0}")]
    Base64(String),
}

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        CanonicalCode(bytes)
    }

    pub fn to_base64(&self) -> String {
        base64::engine::general_purpose::STANDARD.encode(&self.0)
    }

    pub fn from_base64(s: &str) -> Result<Self, CodeError> {
        base64::engine::general_purpose::STANDARD
            .decode(s)
            .map(CanonicalCode)
            .map_err(|e| CodeError::Base64(e.to_string()))
    }

    /// Reconstructs the canonically labeled ball this code describes.
    pub fn decode(&self) -> Result<RootedBall, CodeError> {
        decode(&self.0)
    }
}

impl fmt::Debug for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalCode({})", self.to_base64())
    }
}

impl Serialize for CanonicalCode {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_base64())
    }
}

impl<'de> Deserialize<'de> for CanonicalCode {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        CanonicalCode::from_base64(&s).map_err(serde::de::Error::custom)
    }
}

pub fn canonical_code(b: &RootedBall) -> CanonicalCode {
    Canonizer::new(b, b.colors()).run()
}

impl RootedBall {
    pub fn canonical_code(&self) -> CanonicalCode {
        canonical_code(self)
    }

    /// Code of this ball with its colors replaced by `colors`, without
    /// cloning the structure.
    pub fn canonical_code_with_colors(&self, colors: &[u32]) -> CanonicalCode {
        assert_eq!(colors.len(), self.vertex_count());
        Canonizer::new(self, Some(colors)).run()
    }

    /// Relabels the ball into its canonical numbering.
    pub fn canonical_form(&self) -> RootedBall {
        decode(&canonical_code(self).0).expect("own encoding decodes")
    }
}

/// Cell of a vertex, its sorted (neighbor cell, edge kind) signature, and
/// the vertex itself.
type Keyed = (u32, Vec<(u32, u32)>, usize);

struct Canonizer<'a> {
    ball: &'a RootedBall,
    colors: Option<&'a [u32]>,
    adj: Vec<Vec<(usize, u32)>>,
    best: Option<(Vec<u8>, Vec<u32>)>,
    automorphisms: Vec<Vec<usize>>,
}

fn labeled_kind(generator: u32, outgoing: bool) -> u32 {
    2 + 2 * generator + (!outgoing) as u32
}

impl<'a> Canonizer<'a> {
    fn new(ball: &'a RootedBall, colors: Option<&'a [u32]>) -> Self {
        let m = ball.vertex_count();
        let mut adj = vec![Vec::new(); m];
        for e in ball.edges() {
            match e.generator {
                None => {
                    adj[e.a].push((e.b, KIND_PLAIN));
                    adj[e.b].push((e.a, KIND_PLAIN));
                }
                Some(s) => {
                    adj[e.a].push((e.b, labeled_kind(s, true)));
                    adj[e.b].push((e.a, labeled_kind(s, false)));
                }
            }
        }
        if let Some(d) = ball.distinguished() {
            for &(a, b) in d {
                adj[a].push((b, KIND_DISTINGUISHED));
                adj[b].push((a, KIND_DISTINGUISHED));
            }
        }
        Canonizer {
            ball,
            colors,
            adj,
            best: None,
            automorphisms: Vec::new(),
        }
    }

    fn run(mut self) -> CanonicalCode {
        let m = self.ball.vertex_count();
        let keys: Vec<(usize, u32)> = (0..m)
            .map(|v| (self.ball.depth(v), self.colors.map_or(0, |c| c[v])))
            .collect();
        let cells = rank_by(&keys);
        let mut prefix = Vec::new();
        self.search(cells, &mut prefix);
        CanonicalCode(self.best.expect("search visits at least one leaf").0)
    }

    fn refine(&self, cells: &mut [u32]) {
        let m = cells.len();
        let mut count = count_cells(cells);
        let mut sig: Vec<(u32, u32)> = Vec::new();
        while count < m {
            let mut keyed: Vec<Keyed> = Vec::with_capacity(m);
            for v in 0..m {
                sig.clear();
                sig.extend(self.adj[v].iter().map(|&(w, k)| (cells[w], k)));
                sig.sort_unstable();
                keyed.push((cells[v], sig.clone(), v));
            }
            keyed.sort_unstable();
            let mut rank = 0u32;
            for i in 0..m {
                if i > 0 && (keyed[i].0 != keyed[i - 1].0 || keyed[i].1 != keyed[i - 1].1) {
                    rank += 1;
                }
                cells[keyed[i].2] = rank;
            }
            let new_count = rank as usize + 1;
            if new_count == count {
                break;
            }
            count = new_count;
        }
    }

    fn search(&mut self, mut cells: Vec<u32>, prefix: &mut Vec<usize>) {
        self.refine(&mut cells);
        let m = cells.len();
        let mut sizes = vec![0usize; m];
        for &c in &cells {
            sizes[c as usize] += 1;
        }
        let Some(target) = sizes.iter().position(|&s| s > 1) else {
            self.leaf(cells);
            return;
        };
        let members: Vec<usize> = (0..m).filter(|&v| cells[v] as usize == target).collect();
        let mut explored: Vec<usize> = Vec::new();
        for v in members {
            if !explored.is_empty() {
                let mut orbits = UnionFind::new(m);
                for sigma in &self.automorphisms {
                    if prefix.iter().all(|&p| sigma[p] == p) {
                        for (x, &y) in sigma.iter().enumerate() {
                            orbits.union(x, y);
                        }
                    }
                }
                if explored.iter().any(|&u| orbits.find(u) == orbits.find(v)) {
                    continue;
                }
            }
            explored.push(v);
            let child: Vec<u32> = cells
                .iter()
                .enumerate()
                .map(|(u, &c)| 2 * c + (c as usize == target && u != v) as u32)
                .collect();
            prefix.push(v);
            self.search(rank_by(&child), prefix);
            prefix.pop();
        }
    }

    fn leaf(&mut self, labels: Vec<u32>) {
        let code = self.encode(&labels);
        match &self.best {
            None => self.best = Some((code, labels)),
            Some((best, _)) if code < *best => self.best = Some((code, labels)),
            Some((best, best_labels)) if code == *best => {
                let m = labels.len();
                let mut inverse_best = vec![0usize; m];
                for (v, &l) in best_labels.iter().enumerate() {
                    inverse_best[l as usize] = v;
                }
                let sigma: Vec<usize> = labels.iter().map(|&l| inverse_best[l as usize]).collect();
                if sigma.iter().enumerate().any(|(i, &s)| i != s) {
                    self.automorphisms.push(sigma);
                }
            }
            Some(_) => {}
        }
    }

    fn encode(&self, labels: &[u32]) -> Vec<u8> {
        let m = labels.len();
        let mut out = Vec::with_capacity(8 + 4 * m);
        out.push(CODE_VERSION);
        put_varint(&mut out, self.ball.radius() as u64);
        put_varint(&mut out, m as u64);
        let mut flags = 0;
        if self.colors.is_some() {
            flags |= FLAG_COLORS;
        }
        if self.ball.distinguished().is_some() {
            flags |= FLAG_DISTINGUISHED;
        }
        out.push(flags);
        if let Some(c) = self.colors {
            let mut by_label = vec![0u32; m];
            for v in 0..m {
                by_label[labels[v] as usize] = c[v];
            }
            for c in by_label {
                put_varint(&mut out, c as u64);
            }
        }
        let mut triples: Vec<(u32, u32, u32)> = Vec::with_capacity(self.ball.edges().len());
        for e in self.ball.edges() {
            let (a, b) = (labels[e.a], labels[e.b]);
            triples.push(match e.generator {
                None => (a.min(b), a.max(b), KIND_PLAIN),
                Some(s) => (a, b, labeled_kind(s, true)),
            });
        }
        if let Some(d) = self.ball.distinguished() {
            for &(a, b) in d {
                let (a, b) = (labels[a], labels[b]);
                triples.push((a.min(b), a.max(b), KIND_DISTINGUISHED));
            }
        }
        triples.sort_unstable();
        put_varint(&mut out, triples.len() as u64);
        for (a, b, k) in triples {
            put_varint(&mut out, a as u64);
            put_varint(&mut out, b as u64);
            put_varint(&mut out, k as u64);
        }
        out
    }
}

fn rank_by<K: Ord>(keys: &[K]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut cells = vec![0u32; keys.len()];
    let mut rank = 0u32;
    for i in 0..order.len() {
        if i > 0 && keys[order[i]] != keys[order[i - 1]] {
            rank += 1;
        }
        cells[order[i]] = rank;
    }
    cells
}

fn count_cells(cells: &[u32]) -> usize {
    cells.iter().copied().max().map_or(0, |m| m as usize + 1)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn put_varint(out: &mut Vec<u8>, mut x: u64) {
    loop {
        let byte = (x & 0x7f) as u8;
        x >>= 7;
        if x == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn byte(&mut self) -> Result<u8, CodeError> {
        let b = *self.bytes.get(self.pos).ok_or(CodeError::Truncated)?;
        self.pos += 1;
        Ok(b)
    }

    fn varint(&mut self) -> Result<u64, CodeError> {
        let mut x = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.byte()?;
            x |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                return Ok(x);
            }
        }
        Err(CodeError::Malformed("varint overflow"))
    }

    fn small(&mut self, limit: u64, what: &'static str) -> Result<usize, CodeError> {
        let x = self.varint()?;
        if x > limit {
            return Err(CodeError::Malformed(what));
        }
        Ok(x as usize)
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

fn decode(bytes: &[u8]) -> Result<RootedBall, CodeError> {
    let mut r = Reader { bytes, pos: 0 };
    let version = r.byte()?;
    if version != CODE_VERSION {
        return Err(CodeError::Version(version));
    }
    let radius = r.small(u32::MAX as u64, "radius too large")?;
    // Every vertex costs at least one byte (a color or an edge endpoint) in
    // a well-formed code, except a lone root.
    let m = r.small(r.remaining() as u64 + 1, "vertex count exceeds code size")?;
    let flags = r.byte()?;
    if flags & !(FLAG_COLORS | FLAG_DISTINGUISHED) != 0 {
        return Err(CodeError::Malformed("unknown flags"));
    }
    let colors = if flags & FLAG_COLORS != 0 {
        let mut c = Vec::with_capacity(m);
        for _ in 0..m {
            c.push(r.small(u32::MAX as u64, "color too large")? as u32);
        }
        Some(c)
    } else {
        None
    };
    let count = r.small(r.remaining() as u64 / 3, "edge count exceeds code size")?;
    let mut edges = Vec::new();
    let mut distinguished = (flags & FLAG_DISTINGUISHED != 0).then(Vec::new);
    for _ in 0..count {
        let a = r.small(u32::MAX as u64, "vertex too large")?;
        let b = r.small(u32::MAX as u64, "vertex too large")?;
        let k = r.small(u32::MAX as u64, "edge kind too large")? as u32;
        match k {
            KIND_PLAIN => edges.push(BallEdge { a, b, generator: None }),
            KIND_DISTINGUISHED => distinguished
                .as_mut()
                .ok_or(CodeError::Malformed("distinguished edge without flag"))?
                .push((a, b)),
            k if k % 2 == 0 => edges.push(BallEdge {
                a,
                b,
                generator: Some((k - 2) / 2),
            }),
            _ => return Err(CodeError::Malformed("incoming edge kind in code")),
        }
    }
    if r.remaining() != 0 {
        return Err(CodeError::Trailing);
    }
    RootedBall::from_parts(radius, m, edges, colors, distinguished)
        .map_err(|_| CodeError::Malformed("parts do not form a rooted ball"))
}

#[cfg(test)]
mod tests {
    use super::super::families::*;
    use super::super::{ball, BallDecorations, Coloring, Graph};
    use super::*;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn plain(g: &Graph, v: usize, r: usize) -> RootedBall {
        ball(g, v, r, BallDecorations::default()).unwrap()
    }

    #[test]
    fn rooted_three_paths_agree() {
        let c6 = plain(&cycle(6), 4, 1);
        let p3 = plain(&path(3), 1, 1);
        assert_eq!(c6.canonical_code(), p3.canonical_code());
        // The path's endpoint is not isomorphic to its midpoint as a rooted graph.
        assert_ne!(plain(&path(3), 0, 1).canonical_code(), p3.canonical_code());
    }

    #[test]
    fn explicit_isomorphism_confirms_path_codes() {
        // Ball of 0 in C_6 has vertices [0, 1, 5]; map 0->1, 1->0, 5->2 into P_3.
        let c6 = plain(&cycle(6), 0, 1);
        let p3 = plain(&path(3), 1, 1);
        assert_eq!(c6.vertex_count(), p3.vertex_count());
        let map = [0usize, 1, 2]; // both BFS orders are [root, low, high]
        let mapped: Vec<_> = c6
            .edges()
            .iter()
            .map(|e| (map[e.a].min(map[e.b]), map[e.a].max(map[e.b])))
            .collect();
        let target: Vec<_> = p3.edges().iter().map(|e| (e.a, e.b)).collect();
        assert_eq!(mapped, target);
    }

    #[test]
    fn colors_distinguish() {
        let g = cycle(4);
        let a = Coloring::new(vec![1, 2, 1, 2], 2).unwrap();
        let b = Coloring::new(vec![1, 1, 2, 2], 2).unwrap();
        let ba = ball(&g, 0, 1, BallDecorations { colors: Some(&a), ..Default::default() }).unwrap();
        let bb = ball(&g, 0, 1, BallDecorations { colors: Some(&b), ..Default::default() }).unwrap();
        assert_ne!(ba.canonical_code(), bb.canonical_code());
        assert_ne!(ba.canonical_code(), plain(&g, 0, 1).canonical_code());
    }

    #[test]
    fn orientation_of_labels_matters() {
        use super::super::LabeledGraph;
        // A directed 3-cycle and its reverse are isomorphic; a path with
        // both arcs pointing into the root is not isomorphic to one with an
        // arc in and an arc out.
        let into = LabeledGraph::from_arcs(3, [(1, 0, 0), (2, 0, 0)], 2).unwrap();
        let through = LabeledGraph::from_arcs(3, [(1, 0, 0), (0, 2, 0)], 2).unwrap();
        let code = |lg: &LabeledGraph| {
            ball(&lg.graph, 0, 1, BallDecorations { labels: Some(&lg.labels), ..Default::default() })
                .unwrap()
                .canonical_code()
        };
        assert_ne!(code(&into), code(&through));
        let fwd = LabeledGraph::from_arcs(3, [(0, 1, 0), (1, 2, 0), (2, 0, 0)], 2).unwrap();
        let rev = LabeledGraph::from_arcs(3, [(1, 0, 0), (2, 1, 0), (0, 2, 0)], 2).unwrap();
        assert_eq!(code(&fwd), code(&rev));
    }

    #[test]
    fn decode_roundtrip_and_canonical_form_is_stable() {
        for g in [petersen(), torus(4, 4), star(3), random_bounded_degree(25, 3, 60, 9)] {
            for v in 0..g.vertex_count() {
                let b = plain(&g, v, 2);
                let code = b.canonical_code();
                let form = code.decode().unwrap();
                assert_eq!(form.canonical_code(), code);
                assert_eq!(form.canonical_form(), form);
                assert_eq!(CanonicalCode::from_base64(&code.to_base64()).unwrap(), code);
            }
        }
    }

    #[test]
    fn symmetric_trees_are_fast() {
        // Radius-3 ball of the 4-regular tree has a huge automorphism group.
        let g = random_permutation_graph(5000, 2, 3);
        let b = plain(&g, 0, 3);
        let _ = b.canonical_code();
    }

    #[test]
    fn decode_rejects_garbage() {
        assert!(CanonicalCode::from_bytes(vec![]).decode().is_err());
        assert!(CanonicalCode::from_bytes(vec![9]).decode().is_err());
        assert!(CanonicalCode::from_bytes(vec![1, 0, 2, 0, 0]).decode().is_err());
        assert!(CanonicalCode::from_base64("!!").is_err());
    }

    /// Brute-force oracle: two balls are isomorphic iff some root-fixing
    /// permutation maps one edge multiset onto the other.
    fn brute_isomorphic(x: &RootedBall, y: &RootedBall) -> bool {
        let m = x.vertex_count();
        if m != y.vertex_count() || x.edges().len() != y.edges().len() {
            return false;
        }
        let target: Vec<(usize, usize)> = {
            let mut t: Vec<_> = y.edges().iter().map(|e| (e.a.min(e.b), e.a.max(e.b))).collect();
            t.sort_unstable();
            t
        };
        let mut perm: Vec<usize> = (1..m).collect();
        loop {
            let full: Vec<usize> = std::iter::once(0).chain(perm.iter().copied()).collect();
            let mut mapped: Vec<_> = x
                .edges()
                .iter()
                .map(|e| (full[e.a].min(full[e.b]), full[e.a].max(full[e.b])))
                .collect();
            mapped.sort_unstable();
            if mapped == target {
                return true;
            }
            if !next_permutation(&mut perm) {
                return false;
            }
        }
    }

    fn next_permutation(p: &mut [usize]) -> bool {
        if p.len() < 2 {
            return false;
        }
        let mut i = p.len() - 1;
        while i > 0 && p[i - 1] >= p[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = p.len() - 1;
        while p[j] <= p[i - 1] {
            j -= 1;
        }
        p.swap(i - 1, j);
        p[i..].reverse();
        true
    }

    #[test]
    fn codes_agree_with_brute_force_isomorphism() {
        let mut balls = Vec::new();
        for seed in 0..12 {
            let g = random_bounded_degree(9, 3, 14, seed);
            for v in 0..g.vertex_count() {
                let b = plain(&g, v, 2);
                if b.vertex_count() <= 7 {
                    balls.push(b);
                }
            }
        }
        for i in 0..balls.len() {
            for j in i..balls.len() {
                let same = balls[i].canonical_code() == balls[j].canonical_code();
                assert_eq!(same, brute_isomorphic(&balls[i], &balls[j]), "balls {i} {j}");
            }
        }
    }

    proptest! {
        #[test]
        fn codes_are_relabeling_invariant(n in 2usize..40, seed in any::<u64>(), r in 1usize..4) {
            let g = random_bounded_degree(n, 3, 2 * n, seed);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
            let h = g.relabeled(&perm).unwrap();
            let colors: Vec<u32> = (0..n).map(|v| (v % 3) as u32 + 1).collect();
            let cg = Coloring::new(colors.clone(), 3).unwrap();
            let mut moved = vec![0u32; n];
            for v in 0..n {
                moved[perm[v]] = colors[v];
            }
            let ch = Coloring::new(moved, 3).unwrap();
            for v in 0..n {
                let a = ball(&g, v, r, BallDecorations { colors: Some(&cg), distinguished: Some(&g), ..Default::default() }).unwrap();
                let b = ball(&h, perm[v], r, BallDecorations { colors: Some(&ch), distinguished: Some(&h), ..Default::default() }).unwrap();
                prop_assert_eq!(a.canonical_code(), b.canonical_code());
            }
        }

        #[test]
        fn decode_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            let _ = CanonicalCode::from_bytes(bytes).decode();
        }
    }
}
