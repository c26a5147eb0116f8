//! Text format for presentations and subgroup generators.
//!
//! ```text
//! # the free abelian group of rank 2
//! gens: a b
//! rel: abAB
//! ```
//!
//! Generators are distinct lowercase letters; an uppercase letter is the
//! inverse. A letter may carry a signed exponent (`a^5`, `b^-2`) and `1`
//! denotes the empty word. Subgroup files list `sub: <word>` lines.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{SchreierError, Word};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub generators: Vec<char>,
    /// Cyclically reduced, nonempty.
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn new(generators: Vec<char>, relators: Vec<Word>) -> Result<Self, SchreierError> {
        for (i, &c) in generators.iter().enumerate() {
            if !c.is_ascii_lowercase() || generators[..i].contains(&c) {
                return Err(SchreierError::Parse {
                    line: 0,
                    message: format!("generator `{c}` is not a fresh lowercase letter"),
                });
            }
        }
        let g = generators.len() as u32;
        for r in &relators {
            if r.is_empty() || !r.is_cyclically_reduced() || r.letters().iter().any(|&l| l >> 1 >= g) {
                return Err(SchreierError::Parse {
                    line: 0,
                    message: "relators must be nonempty cyclically reduced words over the alphabet".into(),
                });
            }
        }
        Ok(Presentation { generators, relators })
    }

    /// The free group on the first `k` letters of the alphabet.
    pub fn free(k: usize) -> Self {
        Presentation {
            generators: ('a'..='z').take(k).collect(),
            relators: Vec::new(),
        }
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    /// Total relator length.
    pub fn relator_length(&self) -> usize {
        self.relators.iter().map(Word::len).sum()
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, SchreierError> {
        parse_word(text, &self.generators, 0)
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.display_with(&self.generators).to_string()
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(char::to_string).collect();
        writeln!(f, "gens: {}", gens.join(" "))?;
        for r in &self.relators {
            writeln!(f, "rel: {}", r.display_with(&self.generators))?;
        }
        Ok(())
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> SchreierError {
    SchreierError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_word(text: &str, names: &[char], line: usize) -> Result<Word, SchreierError> {
    let chars: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
    if chars == ['1'] {
        return Ok(Word::empty());
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if !c.is_ascii_alphabetic() {
            return Err(parse_err(line, format!("unexpected `{c}` in word")));
        }
        let g = names
            .iter()
            .position(|&n| n == c.to_ascii_lowercase())
            .ok_or(SchreierError::UnknownGenerator(c.to_ascii_lowercase()))? as u32;
        let mut letter = 2 * g + c.is_ascii_uppercase() as u32;
        i += 1;
        let mut exponent: i64 = 1;
        if chars.get(i) == Some(&'^') {
            i += 1;
            let start = i;
            if chars.get(i) == Some(&'-') {
                i += 1;
            }
            while chars.get(i).is_some_and(char::is_ascii_digit) {
                i += 1;
            }
            let digits: String = chars[start..i].iter().collect();
            exponent = digits
                .parse::<i64>()
                .ok()
                .filter(|e| e.unsigned_abs() <= 1_000_000)
                .ok_or_else(|| parse_err(line, format!("bad exponent `{digits}`")))?;
        }
        if exponent < 0 {
            letter ^= 1;
        }
        out.extend(std::iter::repeat_n(letter, exponent.unsigned_abs() as usize));
        if out.len() > 10_000_000 {
            return Err(parse_err(line, "word too long"));
        }
    }
    Ok(Word(out))
}

fn strip<'a>(content: &'a str, key: &str) -> Option<&'a str> {
    content.strip_prefix(key).and_then(|rest| rest.trim_start().strip_prefix(':'))
}

/// Parses a presentation. Relators are cyclically reduced; each change is
/// reported as a warning, and relators reducing to the empty word are
/// dropped.
pub fn parse_presentation(text: &str) -> Result<(Presentation, Vec<String>), SchreierError> {
    let mut generators: Option<Vec<char>> = None;
    let mut relators = Vec::new();
    let mut warnings = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = strip(content, "gens") {
            if generators.is_some() {
                return Err(parse_err(line, "duplicate `gens:` line"));
            }
            let mut gens = Vec::new();
            for tok in rest.split_whitespace() {
                let mut cs = tok.chars();
                let (Some(c), None) = (cs.next(), cs.next()) else {
                    return Err(parse_err(line, format!("generator `{tok}` must be a single letter")));
                };
                if !c.is_ascii_lowercase() {
                    return Err(parse_err(line, format!("generator `{c}` must be a lowercase letter")));
                }
                if gens.contains(&c) {
                    return Err(parse_err(line, format!("duplicate generator `{c}`")));
                }
                gens.push(c);
            }
            generators = Some(gens);
        } else if let Some(rest) = strip(content, "rel") {
            let names = generators
                .as_ref()
                .ok_or_else(|| parse_err(line, "`rel:` before `gens:`"))?;
            let w = parse_word(rest, names, line)?;
            let reduced = w.cyclic_reduce();
            if reduced.is_empty() {
                warnings.push(format!("line {line}: relator reduces to the identity and was dropped"));
                continue;
            }
            if reduced != w {
                warnings.push(format!(
                    "line {line}: relator reduced to {}",
                    reduced.display_with(names)
                ));
            }
            relators.push(reduced);
        } else {
            return Err(parse_err(line, "expected `gens:` or `rel:`"));
        }
    }
    let generators = generators.ok_or_else(|| parse_err(1, "missing `gens:` line"))?;
    Ok((Presentation { generators, relators }, warnings))
}

/// Parses `sub: <word>` lines over the alphabet of `p`; words are freely
/// reduced.
pub fn parse_subgroup(text: &str, p: &Presentation) -> Result<Vec<Word>, SchreierError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let rest = strip(content, "sub").ok_or_else(|| parse_err(line, "expected `sub: <word>`"))?;
        out.push(parse_word(rest, &p.generators, line)?.free_reduce());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let (p, w) = parse_presentation("gens: a\nrel: aaaaa\n").unwrap();
        assert_eq!(p.generators, vec!['a']);
        assert_eq!(p.relators, vec![Word(vec![0; 5])]);
        assert!(w.is_empty());
        let (z2, _) = parse_presentation("# Z^2\ngens: a b\nrel: abAB\n").unwrap();
        assert_eq!(z2.relators, vec![Word(vec![0, 2, 1, 3])]);
        assert_eq!(z2.to_string(), "gens: a b\nrel: abAB\n");
        let (f2, _) = parse_presentation("gens: a b").unwrap();
        assert!(f2.relators.is_empty());
        assert_eq!(f2, Presentation::free(2));
    }

    #[test]
    fn powers_and_reduction_warnings() {
        let (p, w) = parse_presentation("gens: a b\nrel: a^5\nrel: b a^-2 A B\nrel: aA\n").unwrap();
        assert_eq!(p.relators[0], Word(vec![0; 5]));
        assert_eq!(p.relators[1], Word(vec![1, 1, 1]));
        assert_eq!(p.relators.len(), 2);
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn errors_carry_lines() {
        assert!(matches!(parse_presentation("gens: a\nrel: ab\n"), Err(SchreierError::UnknownGenerator('b'))));
        assert!(matches!(parse_presentation("gens: a a\n"), Err(SchreierError::Parse { line: 1, .. })));
        assert!(matches!(parse_presentation("rel: a\n"), Err(SchreierError::Parse { line: 1, .. })));
        assert!(matches!(parse_presentation("gens: a\nfoo\n"), Err(SchreierError::Parse { line: 2, .. })));
        assert!(matches!(parse_presentation("gens: a\nrel: a^x\n"), Err(SchreierError::Parse { line: 2, .. })));
        assert!(parse_presentation("").is_err());
    }

    #[test]
    fn subgroups() {
        let p = Presentation::free(2);
        let s = parse_subgroup("sub: a^3\nsub: bB b\n", &p).unwrap();
        assert_eq!(s, vec![Word(vec![0; 3]), Word(vec![2])]);
        assert!(parse_subgroup("a\n", &p).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(letters in proptest::collection::vec(0u32..4, 1..12)) {
            let w = Word(letters).cyclic_reduce();
            prop_assume!(!w.is_empty());
            let p = Presentation::new(vec!['a', 'b'], vec![w]).unwrap();
            let (back, warnings) = parse_presentation(&p.to_string()).unwrap();
            prop_assert_eq!(back, p);
            prop_assert!(warnings.is_empty());
        }

        #[test]
        fn never_panics(text in "\\PC{0,120}") {
            if let Ok((p, _)) = parse_presentation(&text) {
                let _ = parse_subgroup(&text, &p);
            }
        }
    }
}
