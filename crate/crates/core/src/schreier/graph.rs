use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Presentation, SchreierError, Word};
use crate::graph::{Graph, LabeledGraph};

/// A transitive right action of the generators on `0..n`, rooted at coset 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SchreierRepr", into = "SchreierRepr")]
pub struct SchreierGraph {
    generators: Vec<char>,
    perms: Vec<Vec<usize>>,
    inverses: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct SchreierRepr {
    generators: Vec<char>,
    n: usize,
    #[serde(default)]
    root: usize,
    perm: BTreeMap<char, Vec<usize>>,
}

impl TryFrom<SchreierRepr> for SchreierGraph {
    type Error = SchreierError;

    fn try_from(mut r: SchreierRepr) -> Result<Self, SchreierError> {
        if r.root != 0 {
            return Err(SchreierError::Invalid("root must be coset 0".into()));
        }
        if r.perm.len() != r.generators.len() {
            return Err(SchreierError::GeneratorCount {
                expected: r.generators.len(),
                got: r.perm.len(),
            });
        }
        let mut perms = Vec::with_capacity(r.generators.len());
        for c in &r.generators {
            let p = r.perm.remove(c).ok_or(SchreierError::UnknownGenerator(*c))?;
            if p.len() != r.n {
                return Err(SchreierError::NotPermutation {
                    generator: c.to_string(),
                    n: r.n,
                });
            }
            perms.push(p);
        }
        schreier_from_permutations(perms, &r.generators)
    }
}

impl From<SchreierGraph> for SchreierRepr {
    fn from(s: SchreierGraph) -> Self {
        SchreierRepr {
            n: s.n(),
            root: 0,
            perm: s.generators.iter().copied().zip(s.perms).collect(),
            generators: s.generators,
        }
    }
}

impl SchreierGraph {
    /// Validates that each array is a bijection of a common domain; does not
    /// check transitivity.
    pub fn new(generators: Vec<char>, perms: Vec<Vec<usize>>) -> Result<Self, SchreierError> {
        if perms.len() != generators.len() {
            return Err(SchreierError::GeneratorCount {
                expected: generators.len(),
                got: perms.len(),
            });
        }
        for (i, &c) in generators.iter().enumerate() {
            if !c.is_ascii_lowercase() || generators[..i].contains(&c) {
                return Err(SchreierError::Invalid(format!("bad generator name `{c}`")));
            }
        }
        let n = perms.first().map_or(0, Vec::len);
        if n == 0 {
            return Err(SchreierError::EmptyDomain);
        }
        let mut inverses = Vec::with_capacity(perms.len());
        for (p, &c) in perms.iter().zip(&generators) {
            let bad = || SchreierError::NotPermutation {
                generator: c.to_string(),
                n,
            };
            if p.len() != n {
                return Err(bad());
            }
            let mut inv = vec![usize::MAX; n];
            for (x, &y) in p.iter().enumerate() {
                if y >= n || inv[y] != usize::MAX {
                    return Err(bad());
                }
                inv[y] = x;
            }
            inverses.push(inv);
        }
        Ok(SchreierGraph {
            generators,
            perms,
            inverses,
        })
    }

    pub fn n(&self) -> usize {
        self.perms[0].len()
    }

    pub fn generators(&self) -> &[char] {
        &self.generators
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn permutation(&self, generator: usize) -> &[usize] {
        &self.perms[generator]
    }

    /// Undirected Schreier edges, one per (coset, generator); fixed points
    /// are loops.
    pub fn edge_count(&self) -> usize {
        self.n() * self.generator_count()
    }

    #[inline]
    pub fn act(&self, coset: usize, letter: u32) -> usize {
        let g = (letter >> 1) as usize;
        if letter & 1 == 0 {
            self.perms[g][coset]
        } else {
            self.inverses[g][coset]
        }
    }

    pub fn act_word(&self, coset: usize, w: &Word) -> usize {
        w.letters().iter().fold(coset, |c, &l| self.act(c, l))
    }

    /// Cosets visited by reading `w` from `coset`, including both ends.
    pub fn walk(&self, coset: usize, w: &Word) -> Vec<usize> {
        let mut out = Vec::with_capacity(w.len() + 1);
        out.push(coset);
        let mut c = coset;
        for &l in w.letters() {
            c = self.act(c, l);
            out.push(c);
        }
        out
    }

    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut orbit = vec![s];
            let mut i = 0;
            while i < orbit.len() {
                let c = orbit[i];
                i += 1;
                for l in 0..2 * self.generator_count() as u32 {
                    let d = self.act(c, l);
                    if !seen[d] {
                        seen[d] = true;
                        orbit.push(d);
                    }
                }
            }
            orbit.sort_unstable();
            out.push(orbit);
        }
        out
    }

    pub fn is_transitive(&self) -> bool {
        self.orbits().len() == 1
    }

    /// Arcs `c -> c.s` labeled by generator index; degree bound `2 |S|`.
    pub fn to_labeled_graph(&self) -> LabeledGraph {
        let arcs = self
            .perms
            .iter()
            .enumerate()
            .flat_map(|(g, p)| p.iter().enumerate().map(move |(c, &d)| (c, d, g as u32)));
        LabeledGraph::from_arcs(self.n(), arcs, (2 * self.generator_count()).max(1)).expect("valid action graph")
    }

    pub fn to_graph(&self) -> Graph {
        self.to_labeled_graph().graph
    }
}

/// Builds a Schreier graph from permutation arrays, rejecting
/// non-bijections and intransitive actions.
pub fn schreier_from_permutations(perms: Vec<Vec<usize>>, names: &[char]) -> Result<SchreierGraph, SchreierError> {
    let s = SchreierGraph::new(names.to_vec(), perms)?;
    let orbits = s.orbits();
    if orbits.len() > 1 {
        return Err(SchreierError::Intransitive { orbits });
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelatorCheck {
    pub ok: bool,
    /// First `(relator index, coset)` where the relator walk does not close.
    pub failure: Option<(usize, usize)>,
}

impl RelatorCheck {
    pub fn into_result(self) -> Result<(), SchreierError> {
        match self.failure {
            None => Ok(()),
            Some((relator, coset)) => Err(SchreierError::RelatorFailure { relator, coset }),
        }
    }
}

/// Checks that every relator acts as the identity.
pub fn check_relators(sch: &SchreierGraph, p: &Presentation) -> Result<RelatorCheck, SchreierError> {
    if sch.generators() != p.generators.as_slice() {
        return Err(SchreierError::AlphabetMismatch {
            left: sch.generators().to_vec(),
            right: p.generators.clone(),
        });
    }
    for (ri, r) in p.relators.iter().enumerate() {
        for c in 0..sch.n() {
            if sch.act_word(c, r) != c {
                return Ok(RelatorCheck {
                    ok: false,
                    failure: Some((ri, c)),
                });
            }
        }
    }
    Ok(RelatorCheck { ok: true, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schreier::parse_presentation;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cycle_perm(n: usize) -> Vec<usize> {
        (0..n).map(|i| (i + 1) % n).collect()
    }

    #[test]
    fn cycle_action() {
        let s = schreier_from_permutations(vec![cycle_perm(7)], &['a']).unwrap();
        let g = s.to_graph();
        assert_eq!(g.edge_count(), 7);
        assert_eq!(g.regular_degree(), Some(2));
        assert_eq!(s.act_word(0, &Word::power(0, -1)), 6);
        assert_eq!(s.act_word(3, &Word::power(0, 7)), 3);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            schreier_from_permutations(vec![vec![0, 0]], &['a']),
            Err(SchreierError::NotPermutation { .. })
        ));
        match schreier_from_permutations(vec![vec![0, 1]], &['a']) {
            Err(SchreierError::Intransitive { orbits }) => assert_eq!(orbits, vec![vec![0], vec![1]]),
            other => panic!("{other:?}"),
        }
        assert!(matches!(schreier_from_permutations(vec![vec![]], &['a']), Err(SchreierError::EmptyDomain)));
        assert!(schreier_from_permutations(vec![vec![0]], &['a', 'b']).is_err());
    }

    #[test]
    fn torus_against_presentations() {
        let m = 4;
        let a: Vec<usize> = (0..m * m).map(|c| (c / m) * m + (c % m + 1) % m).collect();
        let b: Vec<usize> = (0..m * m).map(|c| (c + m) % (m * m)).collect();
        let s = schreier_from_permutations(vec![a, b], &['a', 'b']).unwrap();
        let (z2, _) = parse_presentation("gens: a b\nrel: abAB\n").unwrap();
        assert!(check_relators(&s, &z2).unwrap().ok);
        assert!(check_relators(&s, &Presentation::free(2)).unwrap().ok);
        let (wrong, _) = parse_presentation("gens: a b\nrel: a^3\n").unwrap();
        assert_eq!(check_relators(&s, &wrong).unwrap().failure, Some((0, 0)));
        assert!(matches!(
            check_relators(&s, &Presentation::free(3)),
            Err(SchreierError::AlphabetMismatch { .. })
        ));
    }

    #[test]
    fn random_permutations_rarely_commute() {
        let (z2, _) = parse_presentation("gens: a b\nrel: abAB\n").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut p: Vec<usize> = (0..30).collect();
        let mut q = p.clone();
        p.shuffle(&mut rng);
        q.shuffle(&mut rng);
        if let Ok(s) = schreier_from_permutations(vec![p, q], &['a', 'b']) {
            let check = check_relators(&s, &z2).unwrap();
            assert!(!check.ok);
            assert!(check.failure.is_some());
        }
    }

    #[test]
    fn json_shape() {
        let s = schreier_from_permutations(vec![cycle_perm(3)], &['a']).unwrap();
        let j = serde_json::to_value(&s).unwrap();
        assert_eq!(j, serde_json::json!({"generators": ["a"], "n": 3, "root": 0, "perm": {"a": [1, 2, 0]}}));
        let back: SchreierGraph = serde_json::from_value(j).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<SchreierGraph>(r#"{"generators":["a"],"n":2,"root":0,"perm":{"a":[0,1]}}"#).is_err());
    }

    proptest! {
        #[test]
        fn inverse_letters_undo(seed in any::<u64>(), n in 1usize..20, w in proptest::collection::vec(0u32..4, 0..15)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let perms: Vec<Vec<usize>> = (0..2).map(|_| { let mut p: Vec<usize> = (0..n).collect(); p.shuffle(&mut rng); p }).collect();
            let s = SchreierGraph::new(vec!['a', 'b'], perms).unwrap();
            let w = Word(w);
            for c in 0..n {
                prop_assert_eq!(s.act_word(s.act_word(c, &w), &w.inverse()), c);
            }
            let total: usize = s.orbits().iter().map(Vec::len).sum();
            prop_assert_eq!(total, n);
        }
    }
}
