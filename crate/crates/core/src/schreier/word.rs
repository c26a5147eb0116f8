use std::fmt;

use serde::{Deserialize, Serialize};

/// A word in generators and their inverses. Letter `2 i` is generator `i`
/// and letter `2 i + 1` its inverse, so `letter ^ 1` inverts a letter.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<i64>", try_from = "Vec<i64>")]
pub struct Word(pub Vec<u32>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn generator(i: u32) -> Self {
        Word(vec![2 * i])
    }

    /// `g^e` for a generator index and a signed exponent.
    pub fn power(i: u32, e: i64) -> Self {
        let letter = if e >= 0 { 2 * i } else { 2 * i + 1 };
        Word(vec![letter; e.unsigned_abs() as usize])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&l| l ^ 1).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn free_reduce(&self) -> Word {
        let mut out: Vec<u32> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&(l ^ 1)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    /// Freely reduces, then strips letters cancelling across the ends.
    pub fn cyclic_reduce(&self) -> Word {
        let w = self.free_reduce().0;
        let (mut i, mut j) = (0, w.len());
        while j - i >= 2 && w[i] == w[j - 1] ^ 1 {
            i += 1;
            j -= 1;
        }
        Word(w[i..j].to_vec())
    }

    pub fn is_freely_reduced(&self) -> bool {
        self.0.windows(2).all(|p| p[0] != p[1] ^ 1)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_freely_reduced() && (self.0.len() < 2 || self.0[0] != self.0[self.0.len() - 1] ^ 1)
    }

    /// Exponent sum of each generator.
    pub fn exponent_sums(&self, generators: usize) -> Vec<i64> {
        let mut out = vec![0; generators];
        for &l in &self.0 {
            out[(l >> 1) as usize] += if l & 1 == 0 { 1 } else { -1 };
        }
        out
    }

    /// Number of occurrences of generator `i` or its inverse.
    pub fn occurrences(&self, i: u32) -> usize {
        self.0.iter().filter(|&&l| l >> 1 == i).count()
    }

    /// Least rotation of this word or its inverse; equal for relators that
    /// differ by conjugation and inversion.
    pub fn cyclic_normal_form(&self) -> Word {
        let w = self.cyclic_reduce();
        let mut best = w.clone();
        for cand in [w.clone(), w.inverse()] {
            for k in 0..cand.len() {
                let mut rot = cand.0[k..].to_vec();
                rot.extend_from_slice(&cand.0[..k]);
                if rot < best.0 {
                    best = Word(rot);
                }
            }
        }
        best
    }

    /// Signed 1-based generator indices: `i + 1` for generator `i`,
    /// `-(i + 1)` for its inverse.
    pub fn to_signed(&self) -> Vec<i64> {
        self.0
            .iter()
            .map(|&l| {
                let g = (l >> 1) as i64 + 1;
                if l & 1 == 0 {
                    g
                } else {
                    -g
                }
            })
            .collect()
    }

    pub fn from_signed(v: &[i64]) -> Option<Word> {
        v.iter()
            .map(|&x| {
                if x == 0 || x.unsigned_abs() > u32::MAX as u64 / 2 {
                    None
                } else {
                    let g = (x.unsigned_abs() - 1) as u32;
                    Some(2 * g + (x < 0) as u32)
                }
            })
            .collect::<Option<Vec<u32>>>()
            .map(Word)
    }

    /// Renders with one character per generator, uppercase for inverses;
    /// `1` for the empty word.
    pub fn display_with<'a>(&'a self, names: &'a [char]) -> impl fmt::Display + 'a {
        WordDisplay { word: self, names }
    }
}

impl From<Word> for Vec<i64> {
    fn from(w: Word) -> Self {
        w.to_signed()
    }
}

impl TryFrom<Vec<i64>> for Word {
    type Error = String;
    fn try_from(v: Vec<i64>) -> Result<Self, String> {
        Word::from_signed(&v).ok_or_else(|| "word letters must be nonzero signed generator indices".into())
    }
}

struct WordDisplay<'a> {
    word: &'a Word,
    names: &'a [char],
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "1");
        }
        for &l in &self.word.0 {
            let c = self.names.get((l >> 1) as usize).copied().unwrap_or('?');
            if l & 1 == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "{}", c.to_ascii_uppercase())?;
            }
        }
        Ok(())
    }
}
