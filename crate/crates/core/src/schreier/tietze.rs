//! Greedy Tietze simplification of presentations over numbered generators.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{SchreierPresentation, Word};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TietzeResult {
    /// Remaining generators; an upper bound on the rank of the group.
    pub generator_count: usize,
    pub relators: Vec<Word>,
    pub eliminated: usize,
    /// Operations performed (eliminations and substitutions).
    pub steps: usize,
}

/// Simplifies the presentation of the subgroup. `budget` caps the number of
/// eliminations plus substitutions.
pub fn tietze_simplify(sp: &SchreierPresentation, budget: usize) -> TietzeResult {
    simplify_words(sp.generator_count(), sp.relator_words(), budget)
}

/// As [`tietze_simplify`] for an arbitrary presentation with generators
/// `0..generator_count`.
pub fn simplify_words(generator_count: usize, relators: Vec<Word>, budget: usize) -> TietzeResult {
    let initial_len: usize = relators.iter().map(Word::len).sum();
    let length_limit = 4 * initial_len + 10_000;
    let mut s = State {
        g: generator_count,
        rels: relators,
        steps: 0,
        eliminated: 0,
    };
    s.tidy();
    while s.steps < budget {
        if s.eliminate(length_limit) || s.substitute() {
            s.steps += 1;
            s.tidy();
        } else {
            break;
        }
    }
    TietzeResult {
        generator_count: s.g,
        relators: s.rels,
        eliminated: s.eliminated,
        steps: s.steps,
    }
}

struct State {
    g: usize,
    rels: Vec<Word>,
    steps: usize,
    eliminated: usize,
}

impl State {
    /// Cyclically reduces, drops trivial relators and duplicates up to
    /// rotation and inversion.
    fn tidy(&mut self) {
        let mut seen = HashSet::new();
        let rels = std::mem::take(&mut self.rels);
        for r in rels {
            let r = r.cyclic_reduce();
            if r.is_empty() || !seen.insert(r.cyclic_normal_form()) {
                continue;
            }
            self.rels.push(r);
        }
        self.rels.sort_by_key(Word::len);
    }

    /// Finds a generator occurring exactly once in some relator, solves for
    /// it and substitutes everywhere. Picks the move adding the least total
    /// length.
    fn eliminate(&mut self, length_limit: usize) -> bool {
        let mut totals = vec![0usize; self.g];
        for r in &self.rels {
            for &l in r.letters() {
                totals[(l >> 1) as usize] += 1;
            }
        }
        let current: usize = self.rels.iter().map(Word::len).sum();
        let mut best: Option<(usize, usize, u32)> = None;
        for (ri, r) in self.rels.iter().enumerate() {
            let mut counts = std::collections::HashMap::new();
            for &l in r.letters() {
                *counts.entry(l >> 1).or_insert(0usize) += 1;
            }
            for (&x, &c) in &counts {
                if c != 1 {
                    continue;
                }
                // Each other occurrence of x grows by |r| - 2; r itself goes.
                let others = totals[x as usize] - 1;
                let growth = others * (r.len().saturating_sub(2)) + 1;
                let cost = current + growth - r.len() - 1;
                if cost > length_limit {
                    continue;
                }
                if best.is_none_or(|(b, _, _)| growth < b) {
                    best = Some((growth, ri, x));
                }
            }
        }
        let Some((_, ri, x)) = best else {
            return false;
        };
        let r = self.rels.remove(ri);
        let pos = r.letters().iter().position(|&l| l >> 1 == x).expect("occurs once");
        // r = u x^e v, so x^e = u^{-1} v^{-1} and x = (v u)^{-e}.
        let mut vu: Vec<u32> = r.letters()[pos + 1..].to_vec();
        vu.extend_from_slice(&r.letters()[..pos]);
        let vu = Word(vu);
        let value = if r.letters()[pos] & 1 == 0 { vu.inverse() } else { vu };
        let value_inv = value.inverse();
        for rel in &mut self.rels {
            let mut out = Vec::with_capacity(rel.len());
            for &l in rel.letters() {
                if l >> 1 == x {
                    out.extend_from_slice(if l & 1 == 0 { value.letters() } else { value_inv.letters() });
                } else {
                    out.push(l);
                }
            }
            for l in &mut out {
                if *l >> 1 > x {
                    *l -= 2;
                }
            }
            *rel = Word(out);
        }
        self.g -= 1;
        self.eliminated += 1;
        true
    }

    /// Replaces a piece of one relator by the shorter complement of a
    /// cyclic conjugate of another.
    fn substitute(&mut self) -> bool {
        let n = self.rels.len();
        if n < 2 || self.rels.iter().map(Word::len).sum::<usize>() > 20_000 {
            return false;
        }
        for a in 0..n {
            let ra = self.rels[a].clone();
            let la = ra.len();
            for b in 0..n {
                if a == b || self.rels[b].len() < la.div_ceil(2) + 1 {
                    continue;
                }
                if let Some(new) = shorten(&self.rels[b], &ra) {
                    self.rels[b] = new;
                    return true;
                }
            }
        }
        false
    }
}

/// If a cyclic conjugate of `r` or its inverse has a prefix of more than half
/// its length occurring cyclically in `target`, replaces that occurrence by
/// the inverse of the rest.
fn shorten(target: &Word, r: &Word) -> Option<Word> {
    let lr = r.len();
    let lt = target.len();
    let need = lr / 2 + 1;
    if lr == 0 || lt < need {
        return None;
    }
    let t = target.letters();
    for cand in [r.clone(), r.inverse()] {
        for rot in 0..lr {
            let rotated: Vec<u32> = cand.letters()[rot..].iter().chain(&cand.letters()[..rot]).copied().collect();
            for start in 0..lt {
                let mut k = 0;
                while k < lr && k < lt && t[(start + k) % lt] == rotated[k] {
                    k += 1;
                }
                if k < need {
                    continue;
                }
                // target = (piece of length k starting at `start`) + rest, cyclically.
                let rest: Vec<u32> = (k..lt).map(|i| t[(start + i) % lt]).collect();
                let replacement = Word(rotated[k..].to_vec()).inverse();
                let mut out = replacement.0;
                out.extend(rest);
                let out = Word(out).cyclic_reduce();
                if out.len() < lt {
                    return Some(out);
                }
            }
        }
    }
    None
}
