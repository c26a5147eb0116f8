//! Finitely presented groups acting on finite coset spaces.
//!
//! Actions are on the right: a coset `c` and a word `w = x1 x2 ... xk` give
//! `c . w`, reading `w` left to right. The root coset 0 is the subgroup.

mod enumerate;
mod families;
mod farber;
mod graph;
mod presentation;
mod rank;
mod rs;
mod tietze;
mod word;

use thiserror::Error;

pub use enumerate::{todd_coxeter, DEFAULT_MAX_COSETS};
pub use families::{builtin_family, Family, FAMILY_NAMES};
pub use farber::{cayley_ball_match, farber_statistic, CayleyKind, FixedPointRow};
pub use graph::{check_relators, schreier_from_permutations, RelatorCheck, SchreierGraph};
pub use presentation::{parse_presentation, parse_subgroup, Presentation};
pub use rank::{
    abelian_invariants, abelianized_rank, rank_gradient_table, rank_quotient, verify_generators, AbelianInvariants,
    GeneratorCheck, RankOptions, RankRow,
};
pub use rs::{reidemeister_schreier, LiftedRelator, SchreierGenerator, SchreierPresentation, TraceStep};
pub use tietze::{simplify_words, tietze_simplify, TietzeResult};
pub use word::Word;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchreierError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("generator `{0}` is not in the alphabet")]
    UnknownGenerator(char),
    #[error("permutation for `{generator}` is not a bijection of 0..{n}")]
    NotPermutation { generator: String, n: usize },
    #[error("expected {expected} permutations, got {got}")]
    GeneratorCount { expected: usize, got: usize },
    #[error("coset space is empty")]
    EmptyDomain,
    #[error("action is not transitive; orbits: {orbits:?}")]
    Intransitive { orbits: Vec<Vec<usize>> },
    #[error("coset enumeration exceeded {cap} cosets (infinite index or cap too small)")]
    CapExceeded { cap: usize },
    #[error("generator alphabets differ: {left:?} vs {right:?}")]
    AlphabetMismatch { left: Vec<char>, right: Vec<char> },
    #[error("relator {relator} does not act trivially at coset {coset}")]
    RelatorFailure { relator: usize, coset: usize },
    #[error("candidate word {0} does not fix the root coset")]
    NotInSubgroup(usize),
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("invalid Schreier graph: {0}")]
    Invalid(String),
}
