//! Reidemeister–Schreier presentations of the subgroup stabilizing the root.
//!
//! With the right action, the transversal word of coset `c` is the spanning
//! tree path `t_c` from the root, and the undirected edge `c --s--> c.s`
//! carries `T(c, s) = t_c s t_{c.s}^{-1}`, which lies in the subgroup and is
//! trivial exactly on tree edges. Reading a relator `r` from coset `c`
//! multiplies the `T` of its edges in walk order, giving `t_c r t_c^{-1}`.

use serde::{Deserialize, Serialize};

use super::{check_relators, Presentation, SchreierError, SchreierGraph, Word};

/// One non-tree undirected edge `coset --generator--> coset.generator`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchreierGenerator {
    pub coset: usize,
    pub generator: usize,
    /// `t_c s t_{c.s}^{-1}` over the group alphabet, freely reduced.
    pub word: Word,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub from: usize,
    /// Group letter read at this step (`2 s` or `2 s + 1`).
    pub letter: u32,
    pub to: usize,
    /// Index of the Schreier generator of the traversed edge; `None` on tree
    /// edges.
    pub schreier_generator: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftedRelator {
    pub relator: usize,
    pub coset: usize,
    /// Over the Schreier generator alphabet; not reduced.
    pub word: Word,
    pub trace: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchreierPresentation {
    pub index: usize,
    pub group_generators: Vec<char>,
    /// Tree edges `(parent, letter, child)` in BFS discovery order.
    pub tree: Vec<(usize, u32, usize)>,
    pub transversal: Vec<Word>,
    pub generators: Vec<SchreierGenerator>,
    pub relators: Vec<LiftedRelator>,
}

impl SchreierPresentation {
    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn relator_words(&self) -> Vec<Word> {
        self.relators.iter().map(|r| r.word.clone()).collect()
    }
}

/// Builds the Reidemeister–Schreier presentation of the root stabilizer.
/// Fails if some relator does not act trivially.
pub fn reidemeister_schreier(sch: &SchreierGraph, p: &Presentation) -> Result<SchreierPresentation, SchreierError> {
    check_relators(sch, p)?.into_result()?;
    let n = sch.n();
    let g = sch.generator_count();

    // BFS with letters tried in order a, A, b, B, ...
    let mut parent: Vec<Option<(usize, u32)>> = vec![None; n];
    let mut transversal: Vec<Option<Word>> = vec![None; n];
    transversal[0] = Some(Word::empty());
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    let mut order = vec![0];
    let mut i = 0;
    while i < order.len() {
        let c = order[i];
        i += 1;
        for letter in 0..2 * g as u32 {
            let d = sch.act(c, letter);
            if transversal[d].is_none() {
                let mut w = transversal[c].clone().expect("visited");
                w.0.push(letter);
                transversal[d] = Some(w);
                parent[d] = Some((c, letter));
                tree.push((c, letter, d));
                order.push(d);
            }
        }
    }
    let transversal: Vec<Word> = transversal.into_iter().map(|w| w.expect("transitive action")).collect();

    let is_tree = |c: usize, s: usize| {
        let d = sch.act(c, 2 * s as u32);
        parent[d] == Some((c, 2 * s as u32)) || parent[c] == Some((d, 2 * s as u32 + 1))
    };
    let mut edge_id = vec![None; n * g];
    let mut generators = Vec::new();
    for c in 0..n {
        for s in 0..g {
            if is_tree(c, s) {
                continue;
            }
            let d = sch.act(c, 2 * s as u32);
            let word = transversal[c]
                .concat(&Word::generator(s as u32))
                .concat(&transversal[d].inverse())
                .free_reduce();
            edge_id[c * g + s] = Some(generators.len());
            generators.push(SchreierGenerator {
                coset: c,
                generator: s,
                word,
            });
        }
    }

    let mut relators = Vec::with_capacity(p.relators.len() * n);
    for (ri, r) in p.relators.iter().enumerate() {
        for c in 0..n {
            let mut x = c;
            let mut word = Vec::new();
            let mut trace = Vec::with_capacity(r.len());
            for &letter in r.letters() {
                let y = sch.act(x, letter);
                let s = (letter >> 1) as usize;
                let (id, inverse) = if letter & 1 == 0 {
                    (edge_id[x * g + s], false)
                } else {
                    (edge_id[y * g + s], true)
                };
                if let Some(id) = id {
                    word.push(2 * id as u32 + inverse as u32);
                }
                trace.push(TraceStep {
                    from: x,
                    letter,
                    to: y,
                    schreier_generator: id,
                });
                x = y;
            }
            relators.push(LiftedRelator {
                relator: ri,
                coset: c,
                word: Word(word),
                trace,
            });
        }
    }

    Ok(SchreierPresentation {
        index: n,
        group_generators: sch.generators().to_vec(),
        tree,
        transversal,
        generators,
        relators,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schreier::{parse_presentation, schreier_from_permutations, todd_coxeter};
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Substitutes Schreier generators by their group words.
    fn expand(sp: &SchreierPresentation, w: &Word) -> Word {
        let mut out = Word::empty();
        for &l in w.letters() {
            let t = &sp.generators[(l >> 1) as usize].word;
            out = out.concat(&if l & 1 == 0 { t.clone() } else { t.inverse() });
        }
        out.free_reduce()
    }

    fn check_structure(sch: &SchreierGraph, p: &Presentation, sp: &SchreierPresentation) {
        let n = sch.n();
        assert_eq!(sp.generator_count(), sch.edge_count() - (n - 1));
        for (c, t) in sp.transversal.iter().enumerate() {
            assert_eq!(sch.act_word(0, t), c);
        }
        // Prefix closure: every transversal word extends its parent's.
        for &(parent, letter, child) in &sp.tree {
            let mut w = sp.transversal[parent].clone();
            w.0.push(letter);
            assert_eq!(w, sp.transversal[child]);
        }
        for gen in &sp.generators {
            assert_eq!(sch.act_word(0, &gen.word), 0);
        }
        for lr in &sp.relators {
            let first = lr.trace.first().unwrap();
            assert_eq!(first.from, lr.coset);
            assert_eq!(lr.trace.last().unwrap().to, lr.coset);
            let spelled: Vec<u32> = lr
                .trace
                .iter()
                .filter_map(|s| s.schreier_generator.map(|id| 2 * id as u32 + (s.letter & 1)))
                .collect();
            assert_eq!(spelled, lr.word.0);
            // The lift equals t_c r t_c^{-1} in the free group on S.
            let t = &sp.transversal[lr.coset];
            let expected = t.concat(&p.relators[lr.relator]).concat(&t.inverse()).free_reduce();
            assert_eq!(expand(sp, &lr.word), expected);
        }
    }

    #[test]
    fn free_index_three() {
        let p = Presentation::free(2);
        let sch = schreier_from_permutations(vec![vec![1, 2, 0], vec![0, 1, 2]], &['a', 'b']).unwrap();
        let sp = reidemeister_schreier(&sch, &p).unwrap();
        assert_eq!(sp.generator_count(), 4);
        assert!(sp.relators.is_empty());
        check_structure(&sch, &p, &sp);
    }

    #[test]
    fn cyclic_five() {
        let (p, _) = parse_presentation("gens: a\nrel: a^5\n").unwrap();
        let sch = todd_coxeter(&p, &[], 100).unwrap();
        let sp = reidemeister_schreier(&sch, &p).unwrap();
        assert_eq!(sp.generator_count(), 1);
        assert_eq!(sp.relators.len(), 5);
        for lr in &sp.relators {
            assert_eq!(lr.word.letters().len(), 1);
            assert_eq!(lr.word.letters()[0] >> 1, 0);
        }
        check_structure(&sch, &p, &sp);
    }

    #[test]
    fn torus_commutators() {
        let (p, _) = parse_presentation("gens: a b\nrel: abAB\n").unwrap();
        let sch = todd_coxeter(&p, &[Word::power(0, 3), Word::power(1, 3)], 1000).unwrap();
        let sp = reidemeister_schreier(&sch, &p).unwrap();
        assert_eq!(sp.relators.len(), 9);
        assert!(sp.relators.iter().all(|r| r.word.len() <= 4));
        assert_eq!(sp.generator_count(), 18 - 8);
        check_structure(&sch, &p, &sp);
    }

    #[test]
    fn rejects_non_quotient() {
        let (p, _) = parse_presentation("gens: a\nrel: a^4\n").unwrap();
        let sch = schreier_from_permutations(vec![vec![1, 2, 0]], &['a']).unwrap();
        assert!(matches!(reidemeister_schreier(&sch, &p), Err(SchreierError::RelatorFailure { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn random_free_actions(seed in any::<u64>(), n in 1usize..25) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let perms: Vec<Vec<usize>> = (0..2).map(|_| { let mut v: Vec<usize> = (0..n).collect(); v.shuffle(&mut rng); v }).collect();
            if let Ok(sch) = schreier_from_permutations(perms, &['a', 'b']) {
                let p = Presentation::free(2);
                let sp = reidemeister_schreier(&sch, &p).unwrap();
                // Nielsen–Schreier: n (k - 1) + 1 for k = 2.
                prop_assert_eq!(sp.generator_count(), n + 1);
                check_structure(&sch, &p, &sp);
            }
        }

        #[test]
        fn dihedral_lifts(n in 2usize..9) {
            let (p, _) = parse_presentation(&format!("gens: a b\nrel: a^{n}\nrel: b^2\nrel: abab\n")).unwrap();
            let sch = todd_coxeter(&p, &[Word::generator(1)], 1000).unwrap();
            let sp = reidemeister_schreier(&sch, &p).unwrap();
            check_structure(&sch, &p, &sp);
        }
    }
}
