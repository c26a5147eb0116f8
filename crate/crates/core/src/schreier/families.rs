use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{parse_presentation, schreier_from_permutations, CayleyKind, Presentation, SchreierError, SchreierGraph, Word};

pub const FAMILY_NAMES: [&str; 3] = ["Z-cycle", "Z2-torus", "F2-random"];

/// A presentation with a sequence of its finite Schreier graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub name: String,
    pub params: Vec<usize>,
    pub presentation: Presentation,
    pub graphs: Vec<SchreierGraph>,
    /// Known generating sets of the root stabilizers, where available.
    pub candidates: Vec<Option<Vec<Word>>>,
    pub cayley: Option<CayleyKind>,
}

const MAX_RESAMPLES: usize = 1000;

/// Built-in families:
///
/// * `Z-cycle`: `<a>` acting on `Z/n` by `a: i -> i + 1`; `params` are the
///   cycle lengths.
/// * `Z2-torus`: `<a, b | abAB>` on `(Z/m)^2`; `params` are the side lengths.
/// * `F2-random`: `<a, b>` acting by two uniform random permutations of
///   `0..n`, resampled until transitive; `params` are the sizes.
///
/// Empty `params` select a default sweep.
pub fn builtin_family(name: &str, params: &[usize], seed: u64) -> Result<Family, SchreierError> {
    let bad = |m: &str| SchreierError::Invalid(m.to_string());
    match name {
        "Z-cycle" => {
            let params = defaulted(params, &[5, 10, 20, 50, 100]);
            if params.contains(&0) {
                return Err(bad("cycle lengths must be positive"));
            }
            let graphs = params
                .iter()
                .map(|&n| schreier_from_permutations(vec![(0..n).map(|i| (i + 1) % n).collect()], &['a']))
                .collect::<Result<_, _>>()?;
            let candidates = params.iter().map(|&n| Some(vec![Word::power(0, n as i64)])).collect();
            Ok(Family {
                name: name.into(),
                presentation: Presentation::free(1),
                graphs,
                candidates,
                cayley: Some(CayleyKind::FreeAbelian),
                params,
            })
        }
        "Z2-torus" => {
            let params = defaulted(params, &(2..=12).collect::<Vec<_>>());
            if params.contains(&0) {
                return Err(bad("torus sides must be positive"));
            }
            let graphs = params.iter().map(|&m| torus(m)).collect::<Result<_, _>>()?;
            let candidates = params
                .iter()
                .map(|&m| Some(vec![Word::power(0, m as i64), Word::power(1, m as i64)]))
                .collect();
            let (presentation, _) = parse_presentation("gens: a b\nrel: abAB\n")?;
            Ok(Family {
                name: name.into(),
                presentation,
                graphs,
                candidates,
                cayley: Some(CayleyKind::FreeAbelian),
                params,
            })
        }
        "F2-random" => {
            let params = defaulted(params, &[50, 100, 200]);
            if params.contains(&0) {
                return Err(bad("sizes must be positive"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut graphs = Vec::with_capacity(params.len());
            for &n in &params {
                graphs.push(random_transitive(n, &mut rng)?);
            }
            Ok(Family {
                name: name.into(),
                presentation: Presentation::free(2),
                candidates: vec![None; params.len()],
                graphs,
                cayley: Some(CayleyKind::Free),
                params,
            })
        }
        _ => Err(SchreierError::UnknownFamily(name.into())),
    }
}

fn defaulted(params: &[usize], default: &[usize]) -> Vec<usize> {
    if params.is_empty() { default } else { params }.to_vec()
}

fn torus(m: usize) -> Result<SchreierGraph, SchreierError> {
    let n = m * m;
    let a = (0..n).map(|c| (c / m) * m + (c % m + 1) % m).collect();
    let b = (0..n).map(|c| (c + m) % n).collect();
    schreier_from_permutations(vec![a, b], &['a', 'b'])
}

fn random_transitive(n: usize, rng: &mut ChaCha8Rng) -> Result<SchreierGraph, SchreierError> {
    let mut last = None;
    for _ in 0..MAX_RESAMPLES {
        let perms: Vec<Vec<usize>> = (0..2)
            .map(|_| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(rng);
                p
            })
            .collect();
        match schreier_from_permutations(perms, &['a', 'b']) {
            Ok(s) => return Ok(s),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schreier::{cayley_ball_match, check_relators, rank_gradient_table, RankOptions};

    #[test]
    fn families_are_valid() {
        for name in FAMILY_NAMES {
            let f = builtin_family(name, &[], 7).unwrap();
            assert_eq!(f.graphs.len(), f.params.len());
            for g in &f.graphs {
                assert!(g.is_transitive());
                assert!(check_relators(g, &f.presentation).unwrap().ok);
            }
        }
        assert!(matches!(builtin_family("Z3", &[], 0), Err(SchreierError::UnknownFamily(_))));
    }

    #[test]
    fn seeded_reproducibly() {
        let a = builtin_family("F2-random", &[30, 40], 11).unwrap();
        let b = builtin_family("F2-random", &[30, 40], 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.graphs[1].n(), 40);
    }

    #[test]
    fn torus_ranks_are_certified() {
        let f = builtin_family("Z2-torus", &[2, 3, 5], 0).unwrap();
        let rows = rank_gradient_table(&f.presentation, &f.graphs, &f.candidates, RankOptions::default()).unwrap();
        for (row, &m) in rows.iter().zip(&f.params) {
            assert_eq!((row.d_lower, row.d_upper), (2, 2));
            assert!(row.certified);
            assert!((row.r_upper - 1.0 / (m * m) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn free_random_rows() {
        let f = builtin_family("F2-random", &[5, 20, 50], 1).unwrap();
        let rows = rank_gradient_table(&f.presentation, &f.graphs, &f.candidates, RankOptions::default()).unwrap();
        for (row, &n) in rows.iter().zip(&f.params) {
            assert_eq!(row.d_lower, n + 1);
            assert_eq!(row.r_upper, 1.0);
        }
        // Radius 0 only sees loops, roughly two per generator on average.
        assert!(cayley_ball_match(&f.graphs[2], CayleyKind::Free, 0) > 0.8);
    }
}
