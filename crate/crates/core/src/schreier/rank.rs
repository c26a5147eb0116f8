//! Rank bounds for finite-index subgroups and rank-gradient tables.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tietze::simplify_words;
use super::{check_relators, reidemeister_schreier, todd_coxeter, Presentation, SchreierError, SchreierGraph, Word};

/// Invariant factor decomposition `Z^free_rank + Z/d1 + ... + Z/dk`, with
/// `d1 | d2 | ... | dk` and every `di > 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "InvariantsRepr", try_from = "InvariantsRepr")]
pub struct AbelianInvariants {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
struct InvariantsRepr {
    free_rank: usize,
    torsion: Vec<String>,
}

impl From<AbelianInvariants> for InvariantsRepr {
    fn from(a: AbelianInvariants) -> Self {
        InvariantsRepr {
            free_rank: a.free_rank,
            torsion: a.torsion.iter().map(BigInt::to_string).collect(),
        }
    }
}

impl TryFrom<InvariantsRepr> for AbelianInvariants {
    type Error = String;
    fn try_from(r: InvariantsRepr) -> Result<Self, String> {
        let torsion = r
            .torsion
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        Ok(AbelianInvariants {
            free_rank: r.free_rank,
            torsion,
        })
    }
}

impl AbelianInvariants {
    /// Minimal number of generators of the abelian group.
    pub fn min_generators(&self) -> usize {
        self.free_rank + self.torsion.len()
    }
}

/// Abelianization of `<x_0..x_{g-1} | relators>` via the Smith normal form
/// of the exponent-sum matrix.
pub fn abelian_invariants(generator_count: usize, relators: &[Word]) -> AbelianInvariants {
    let mut a: Vec<Vec<BigInt>> = relators
        .iter()
        .map(|r| r.exponent_sums(generator_count).into_iter().map(BigInt::from).collect())
        .filter(|row: &Vec<BigInt>| row.iter().any(|x| !x.is_zero()))
        .collect();
    let diag = smith_diagonal(&mut a, generator_count);
    let rank = diag.len();
    let torsion = diag.into_iter().filter(|d| !d.is_one()).collect();
    AbelianInvariants {
        free_rank: generator_count - rank,
        torsion,
    }
}

/// Free rank of the abelianization; a lower bound on the rank of the group.
pub fn abelianized_rank(generator_count: usize, relators: &[Word]) -> usize {
    abelian_invariants(generator_count, relators).free_rank
}

/// Nonzero Smith invariants of an integer matrix with `cols` columns, in
/// divisibility order. Destroys `a`.
fn smith_diagonal(a: &mut [Vec<BigInt>], cols: usize) -> Vec<BigInt> {
    let rows = a.len();
    let mut diag = Vec::new();
    for t in 0..rows.min(cols) {
        loop {
            // Smallest nonzero entry of the trailing block becomes the pivot.
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return diag;
            };
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            let mut clean = true;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = &a[i][t] / &a[t][t];
                if !q.is_zero() {
                    let (head, tail) = a.split_at_mut(i);
                    for (x, p) in tail[0][t..].iter_mut().zip(&head[t][t..]) {
                        *x -= &q * p;
                    }
                }
                clean &= a[i][t].is_zero();
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = &a[t][j] / &a[t][t];
                if !q.is_zero() {
                    for row in a.iter_mut() {
                        let p = row[t].clone();
                        row[j] -= &q * p;
                    }
                }
                clean &= a[t][j].is_zero();
            }
            if !clean {
                continue;
            }
            // Enforce the divisibility chain by folding an offending row in.
            let offending = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&a[i][j] % &a[t][t]).is_zero()));
            match offending {
                Some(i) => {
                    let (head, tail) = a.split_at_mut(i);
                    for (x, y) in head[t].iter_mut().zip(&tail[0]) {
                        *x += y;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
    }
    diag
}

/// `(d - 1) / index`.
pub fn rank_quotient(d: usize, index: usize) -> f64 {
    (d as f64 - 1.0) / index as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub index: usize,
    pub d_lower: usize,
    pub d_upper: usize,
    pub r_lower: f64,
    pub r_upper: f64,
    /// Both bounds agree.
    pub exact: bool,
    /// A supplied generating set was verified; `d_upper` is at most its size.
    pub certified: bool,
    pub abelianization: AbelianInvariants,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorCheck {
    pub pass: bool,
    pub expected_index: usize,
    pub candidate_index: usize,
    pub generator_count: usize,
}

/// Certifies that `candidates` generate the root stabilizer of `sch`: each
/// must fix the root, and enumerating their cosets must give the same index.
pub fn verify_generators(
    p: &Presentation,
    sch: &SchreierGraph,
    candidates: &[Word],
    max_cosets: usize,
) -> Result<GeneratorCheck, SchreierError> {
    if let Some(i) = candidates.iter().position(|w| sch.act_word(0, w) != 0) {
        return Err(SchreierError::NotInSubgroup(i));
    }
    let enumerated = todd_coxeter(p, candidates, max_cosets)?;
    Ok(GeneratorCheck {
        pass: enumerated.n() == sch.n(),
        expected_index: sch.n(),
        candidate_index: enumerated.n(),
        generator_count: candidates.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankOptions {
    pub tietze_budget: usize,
    pub max_cosets: usize,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            tietze_budget: 100_000,
            max_cosets: super::DEFAULT_MAX_COSETS,
        }
    }
}

/// One row per graph: bounds on the rank `d` of the root stabilizer and
/// the corresponding quotients `(d - 1) / index`. With no relators `d` is
/// exact by Nielsen–Schreier. `candidates[i]`, when present, is a proposed
/// generating set for graph `i` which tightens `d_upper` if it verifies.
pub fn rank_gradient_table(
    p: &Presentation,
    schs: &[SchreierGraph],
    candidates: &[Option<Vec<Word>>],
    opts: RankOptions,
) -> Result<Vec<RankRow>, SchreierError> {
    schs.par_iter()
        .enumerate()
        .map(|(i, sch)| rank_row(p, sch, candidates.get(i).and_then(Option::as_deref), opts))
        .collect()
}

fn rank_row(
    p: &Presentation,
    sch: &SchreierGraph,
    candidates: Option<&[Word]>,
    opts: RankOptions,
) -> Result<RankRow, SchreierError> {
    check_relators(sch, p)?.into_result()?;
    let n = sch.n();
    let (d_lower, mut d_upper, abelianization) = if p.relators.is_empty() {
        let d = n * (p.generator_count().saturating_sub(1)) + 1;
        let d = if p.generator_count() == 0 { 0 } else { d };
        (
            d,
            d,
            AbelianInvariants {
                free_rank: d,
                torsion: Vec::new(),
            },
        )
    } else {
        let sp = reidemeister_schreier(sch, p)?;
        let t = simplify_words(sp.generator_count(), sp.relator_words(), opts.tietze_budget);
        let inv = abelian_invariants(t.generator_count, &t.relators);
        (inv.min_generators(), t.generator_count, inv)
    };
    let mut certified = false;
    if let Some(c) = candidates {
        if verify_generators(p, sch, c, opts.max_cosets)?.pass {
            d_upper = d_upper.min(c.len());
            certified = true;
        }
    }
    Ok(RankRow {
        index: n,
        d_lower,
        d_upper,
        r_lower: rank_quotient(d_lower, n),
        r_upper: rank_quotient(d_upper, n),
        exact: d_lower == d_upper,
        certified,
        abelianization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schreier::{parse_presentation, schreier_from_permutations};
    use proptest::prelude::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn smith_examples() {
        // diag(2, 3) is Z/6.
        let inv = abelian_invariants(2, &[Word::power(0, 2), Word::power(1, 3)]);
        assert_eq!(inv.free_rank, 0);
        assert_eq!(inv.torsion, big(&[6]));
        assert_eq!(inv.min_generators(), 1);
        // Z/2 + Z/4 stays two factors.
        let inv = abelian_invariants(3, &[Word::power(0, 2), Word::power(1, 4)]);
        assert_eq!(inv.free_rank, 1);
        assert_eq!(inv.torsion, big(&[2, 4]));
        assert_eq!(abelianized_rank(4, &[]), 4);
        assert_eq!(abelianized_rank(1, &[Word::power(0, 2)]), 0);
        assert_eq!(abelianized_rank(2, &[Word(vec![0, 2, 1, 3])]), 2);
    }

    #[test]
    fn quotients() {
        assert_eq!(rank_quotient(4, 3), 1.0);
        assert_eq!(rank_quotient(1, 17), 0.0);
        assert_eq!(rank_quotient(2, 4), 0.25);
    }

    #[test]
    fn torus_rows() {
        let (p, _) = parse_presentation("gens: a b\nrel: abAB\n").unwrap();
        for m in [2i64, 3, 4] {
            let sub = vec![Word::power(0, m), Word::power(1, m)];
            let sch = todd_coxeter(&p, &sub, 10_000).unwrap();
            let inv = {
                let sp = reidemeister_schreier(&sch, &p).unwrap();
                abelian_invariants(sp.generator_count(), &sp.relator_words())
            };
            assert_eq!(inv.free_rank, 2);
            assert!(inv.torsion.is_empty());
            let rows = rank_gradient_table(&p, &[sch], &[Some(sub)], RankOptions::default()).unwrap();
            let row = &rows[0];
            assert_eq!(row.index, (m * m) as usize);
            assert_eq!(row.d_lower, 2);
            assert_eq!(row.d_upper, 2);
            assert!((row.r_lower - 1.0 / (m * m) as f64).abs() < 1e-12);
            assert!(row.exact);
        }
    }

    #[test]
    fn free_rows_are_exact() {
        let p = Presentation::free(2);
        let sch = schreier_from_permutations(vec![vec![1, 2, 0], vec![0, 1, 2]], &['a', 'b']).unwrap();
        let rows = rank_gradient_table(&p, std::slice::from_ref(&sch), &[], RankOptions::default()).unwrap();
        assert_eq!((rows[0].d_lower, rows[0].d_upper), (4, 4));
        assert_eq!(rows[0].r_upper, 1.0);
        // A Schreier basis: a^3, b, a b A, A A b a a.
        let basis: Vec<Word> = ["a^3", "b", "abA", "a^2bA^2"].iter().map(|s| p.parse_word(s).unwrap()).collect();
        assert!(verify_generators(&p, &sch, &basis, 1000).unwrap().pass);
        // Dropping b gives a proper subgroup of larger index.
        let check = verify_generators(&p, &sch, &[basis[0].clone()], 1000);
        assert!(matches!(check, Ok(GeneratorCheck { pass: false, .. }) | Err(SchreierError::CapExceeded { .. })));
        assert_eq!(verify_generators(&p, &sch, &[Word::generator(0)], 10), Err(SchreierError::NotInSubgroup(0)));
    }

    #[test]
    fn proper_subgroup_candidates_fail() {
        let (p, _) = parse_presentation("gens: a b\nrel: abAB\n").unwrap();
        let sch = todd_coxeter(&p, &[Word::power(0, 2), Word::power(1, 2)], 1000).unwrap();
        let check = verify_generators(&p, &sch, &[Word::power(0, 2), Word::power(1, 4)], 1000).unwrap();
        assert!(!check.pass);
        assert_eq!(check.candidate_index, 8);
    }

    #[test]
    fn cyclic_single_row() {
        let (p, _) = parse_presentation("gens: a\nrel: a^5\n").unwrap();
        let sch = todd_coxeter(&p, &[], 100).unwrap();
        let rows = rank_gradient_table(&p, &[sch], &[], RankOptions::default()).unwrap();
        assert_eq!((rows[0].d_lower, rows[0].d_upper), (0, 0));
        assert!(rows[0].exact);
    }

    /// Determinant-free oracle: the order of a finite abelian group equals
    /// the number of cosets of the trivial subgroup.
    #[test]
    fn torsion_product_matches_group_order() {
        let (p, _) = parse_presentation("gens: a b\nrel: abAB\nrel: a^4b^6\nrel: a^2b^-2\n").unwrap();
        let order = todd_coxeter(&p, &[], 10_000).unwrap().n();
        let inv = abelian_invariants(2, &p.relators);
        assert_eq!(inv.free_rank, 0);
        let prod: BigInt = inv.torsion.iter().product();
        assert_eq!(prod, BigInt::from(order));
    }

    proptest! {
        #[test]
        fn diagonal_invariants(a in 1i64..30, b in 1i64..30) {
            let inv = abelian_invariants(2, &[Word::power(0, a), Word::power(1, b)]);
            let g = num_integer_gcd(a, b);
            let mut expect: Vec<i64> = vec![g, a * b / g];
            expect.retain(|&d| d > 1);
            prop_assert_eq!(inv.torsion, big(&expect));
        }

        #[test]
        fn free_rank_is_corank(rows in proptest::collection::vec(proptest::collection::vec(-3i64..4, 3), 0..4)) {
            // Build relators with the given exponent vectors.
            let rels: Vec<Word> = rows.iter().map(|r| {
                let mut w = Word::empty();
                for (i, &e) in r.iter().enumerate() { w = w.concat(&Word::power(i as u32, e)); }
                w
            }).collect();
            let inv = abelian_invariants(3, &rels);
            prop_assert_eq!(inv.free_rank, 3 - rational_rank(&rows));
        }
    }

    fn num_integer_gcd(mut a: i64, mut b: i64) -> i64 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }

    /// Rank over the rationals by floating Gaussian elimination.
    fn rational_rank(rows: &[Vec<i64>]) -> usize {
        let mut m: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
        let mut rank = 0;
        for c in 0..3 {
            let Some(p) = (rank..m.len()).find(|&i| m[i][c].abs() > 1e-9) else { continue };
            m.swap(rank, p);
            for i in 0..m.len() {
                if i != rank {
                    let f = m[i][c] / m[rank][c];
                    for j in 0..3 {
                        m[i][j] -= f * m[rank][j];
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}
