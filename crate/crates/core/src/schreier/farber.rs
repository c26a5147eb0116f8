//! Local diagnostics for sequences of Schreier graphs: how often a word
//! fixes a coset, and how often a labeled ball looks like the Cayley ball.

use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SchreierGraph, Word};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointRow {
    pub word: Word,
    pub fixed: usize,
    pub fraction: f64,
}

/// Fraction of cosets fixed by each word.
pub fn farber_statistic(sch: &SchreierGraph, words: &[Word]) -> Vec<FixedPointRow> {
    let n = sch.n();
    words
        .iter()
        .map(|w| {
            let fixed = (0..n).into_par_iter().filter(|&c| sch.act_word(c, w) == c).count();
            FixedPointRow {
                word: w.clone(),
                fixed,
                fraction: fixed as f64 / n as f64,
            }
        })
        .collect()
}

/// Groups with a solvable word problem for which the Cayley ball is built
/// explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CayleyKind {
    Free,
    FreeAbelian,
}

/// The radius-`r` Cayley ball: elements in BFS order with, for each letter,
/// the index of the neighbour inside the ball.
struct CayleyBall {
    parent: Vec<(usize, u32)>,
    neighbor: Vec<Vec<Option<usize>>>,
}

fn cayley_ball(kind: CayleyKind, generators: usize, r: usize) -> CayleyBall {
    match kind {
        CayleyKind::Free => build_ball(generators, r, Vec::<u32>::new(), |w: &Vec<u32>, l| {
            let mut w = w.clone();
            if w.last() == Some(&(l ^ 1)) {
                w.pop();
            } else {
                w.push(l);
            }
            w
        }),
        CayleyKind::FreeAbelian => build_ball(generators, r, vec![0i64; generators], |v: &Vec<i64>, l| {
            let mut v = v.clone();
            v[(l >> 1) as usize] += if l & 1 == 0 { 1 } else { -1 };
            v
        }),
    }
}

fn build_ball<K: Clone + Eq + Hash>(generators: usize, r: usize, identity: K, mul: impl Fn(&K, u32) -> K) -> CayleyBall {
    let letters = 2 * generators as u32;
    let mut index: HashMap<K, usize> = HashMap::new();
    let mut keys = vec![identity.clone()];
    let mut depth = vec![0usize];
    let mut parent = vec![(0, 0)];
    index.insert(identity, 0);
    let mut i = 0;
    while i < keys.len() {
        if depth[i] < r {
            for l in 0..letters {
                let k = mul(&keys[i], l);
                if !index.contains_key(&k) {
                    index.insert(k.clone(), keys.len());
                    keys.push(k);
                    depth.push(depth[i] + 1);
                    parent.push((i, l));
                }
            }
        }
        i += 1;
    }
    let neighbor = keys
        .iter()
        .map(|k| (0..letters).map(|l| index.get(&mul(k, l)).copied()).collect())
        .collect();
    CayleyBall { parent, neighbor }
}

/// Fraction of vertices whose labeled `r`-ball is isomorphic, as a rooted
/// labeled graph, to the `r`-ball of the Cayley graph of the free or free
/// abelian group on the same generators.
pub fn cayley_ball_match(sch: &SchreierGraph, kind: CayleyKind, r: usize) -> f64 {
    let ball = cayley_ball(kind, sch.generator_count(), r);
    let n = sch.n();
    let matches = (0..n).into_par_iter().filter(|&v| ball_matches(sch, &ball, v)).count();
    matches as f64 / n as f64
}

fn ball_matches(sch: &SchreierGraph, ball: &CayleyBall, v: usize) -> bool {
    let size = ball.parent.len();
    let mut image = vec![v; size];
    let mut preimage: HashMap<usize, usize> = HashMap::with_capacity(size);
    preimage.insert(v, 0);
    for i in 1..size {
        let (p, l) = ball.parent[i];
        let x = sch.act(image[p], l);
        if preimage.insert(x, i).is_some() {
            return false;
        }
        image[i] = x;
    }
    // Every edge among image vertices must come from a Cayley edge.
    for (i, nbrs) in ball.neighbor.iter().enumerate() {
        for (l, &nb) in nbrs.iter().enumerate() {
            let y = sch.act(image[i], l as u32);
            if preimage.get(&y).copied() != nb {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schreier::schreier_from_permutations;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn torus(m: usize) -> SchreierGraph {
        let a: Vec<usize> = (0..m * m).map(|c| (c / m) * m + (c % m + 1) % m).collect();
        let b: Vec<usize> = (0..m * m).map(|c| (c + m) % (m * m)).collect();
        schreier_from_permutations(vec![a, b], &['a', 'b']).unwrap()
    }

    fn random_f2(n: usize, seed: u64) -> Option<SchreierGraph> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let perms: Vec<Vec<usize>> = (0..2)
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(&mut rng);
                p
            })
            .collect();
        schreier_from_permutations(perms, &['a', 'b']).ok()
    }

    #[test]
    fn fixed_points() {
        let t = torus(5);
        let rows = farber_statistic(&t, &[Word::empty(), Word::generator(0), Word::power(0, 5), Word(vec![0, 2, 1, 3])]);
        assert_eq!(rows[0].fraction, 1.0);
        assert_eq!(rows[1].fraction, 0.0);
        assert_eq!(rows[2].fraction, 1.0);
        assert_eq!(rows[3].fraction, 1.0);
    }

    #[test]
    fn random_permutation_fixed_points_average_one() {
        let ab = Word(vec![0, 2]);
        let (mut total, mut count) = (0.0, 0);
        for seed in 0..200 {
            if let Some(s) = random_f2(100, seed) {
                total += farber_statistic(&s, std::slice::from_ref(&ab))[0].fixed as f64;
                count += 1;
            }
        }
        let mean = total / count as f64;
        assert!((mean - 1.0).abs() < 0.3, "mean fixed points {mean}");
    }

    #[test]
    fn cayley_ball_sizes() {
        let free = cayley_ball(CayleyKind::Free, 2, 3);
        assert_eq!(free.parent.len(), 1 + 4 + 12 + 36);
        let ab = cayley_ball(CayleyKind::FreeAbelian, 2, 3);
        assert_eq!(ab.parent.len(), 2 * 9 + 2 * 3 + 1);
    }

    #[test]
    fn torus_balls() {
        // Balls of the m x m torus embed while 2r < m, but an extra edge
        // closes up between boundary vertices once 2r + 1 = m.
        for m in 3..9 {
            let t = torus(m);
            for r in 0..m {
                let expect = if 2 * r + 1 < m { 1.0 } else { 0.0 };
                assert_eq!(cayley_ball_match(&t, CayleyKind::FreeAbelian, r), expect, "m {m} r {r}");
            }
            assert_eq!(cayley_ball_match(&t, CayleyKind::Free, 2), 0.0);
        }
    }

    #[test]
    fn cycles_are_free_and_free_abelian() {
        let n = 9;
        let c = schreier_from_permutations(vec![(0..n).map(|i| (i + 1) % n).collect()], &['a']).unwrap();
        for r in 0..6 {
            let expect = if 2 * r + 1 < n { 1.0 } else { 0.0 };
            assert_eq!(cayley_ball_match(&c, CayleyKind::Free, r), expect);
            assert_eq!(cayley_ball_match(&c, CayleyKind::FreeAbelian, r), expect);
        }
    }

    /// Oracle: a vertex's r-ball is the free Cayley ball iff no nontrivial
    /// reduced word of length at most 2r + 1 fixes the vertex.
    #[test]
    fn free_match_agrees_with_short_relations() {
        let r = 2;
        let s = random_f2(60, 3).unwrap();
        let words = reduced_words(2, 2 * r + 1);
        let ball = cayley_ball(CayleyKind::Free, 2, r);
        for v in 0..s.n() {
            let short_loop = words.iter().any(|w| !w.is_empty() && s.act_word(v, w) == v);
            assert_eq!(ball_matches(&s, &ball, v), !short_loop, "vertex {v}");
        }
    }

    fn reduced_words(g: u32, max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        let mut frontier = vec![Word::empty()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for l in 0..2 * g {
                    if w.letters().last() == Some(&(l ^ 1)) {
                        continue;
                    }
                    let mut x = w.clone();
                    x.0.push(l);
                    next.push(x);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}
