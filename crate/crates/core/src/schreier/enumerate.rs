//! HLT coset enumeration with coincidence processing.
//!
//! Cosets are scanned in definition order: every relator is traced from the
//! coset (defining new cosets to fill gaps), then the coset's row is filled.
//! When the table reaches the coset cap a lookahead pass (scanning without
//! defining) collapses what it can and dead rows are compacted away.

use super::{Presentation, SchreierError, SchreierGraph, Word};

pub const DEFAULT_MAX_COSETS: usize = 1_000_000;

const NONE: usize = usize::MAX;

struct Full;

struct Enumerator<'a> {
    cols: usize,
    table: Vec<usize>,
    /// Union-find forwarding: `p[c] == c` iff `c` is live.
    p: Vec<usize>,
    live: usize,
    cap: usize,
    queue: Vec<usize>,
    relators: &'a [Vec<u32>],
    subgroup: &'a [Vec<u32>],
}

impl<'a> Enumerator<'a> {
    fn new(cols: usize, cap: usize, relators: &'a [Vec<u32>], subgroup: &'a [Vec<u32>]) -> Self {
        Enumerator {
            cols,
            table: vec![NONE; cols],
            p: vec![0],
            live: 1,
            cap,
            queue: Vec::new(),
            relators,
            subgroup,
        }
    }

    #[inline]
    fn get(&self, c: usize, x: u32) -> usize {
        self.table[c * self.cols + x as usize]
    }

    #[inline]
    fn set(&mut self, c: usize, x: u32, v: usize) {
        self.table[c * self.cols + x as usize] = v;
    }

    fn is_live(&self, c: usize) -> bool {
        self.p[c] == c
    }

    fn define(&mut self, c: usize, x: u32) -> Result<usize, Full> {
        if self.p.len() >= self.cap {
            return Err(Full);
        }
        let d = self.p.len();
        self.p.push(d);
        self.table.resize(self.table.len() + self.cols, NONE);
        self.live += 1;
        self.set(c, x, d);
        self.set(d, x ^ 1, c);
        Ok(d)
    }

    fn rep(&mut self, c: usize) -> usize {
        let mut r = c;
        while self.p[r] != r {
            r = self.p[r];
        }
        let mut s = c;
        while self.p[s] != r {
            let next = self.p[s];
            self.p[s] = r;
            s = next;
        }
        r
    }

    fn merge(&mut self, k: usize, l: usize) {
        let (k, l) = (self.rep(k), self.rep(l));
        if k == l {
            return;
        }
        let (keep, kill) = (k.min(l), k.max(l));
        self.p[kill] = keep;
        self.live -= 1;
        self.queue.push(kill);
    }

    fn coincidence(&mut self, a: usize, b: usize) {
        self.queue.clear();
        self.merge(a, b);
        let mut i = 0;
        while i < self.queue.len() {
            let e = self.queue[i];
            i += 1;
            for x in 0..self.cols as u32 {
                let f = self.get(e, x);
                if f == NONE {
                    continue;
                }
                self.set(f, x ^ 1, NONE);
                let e1 = self.rep(e);
                let f1 = self.rep(f);
                let t = self.get(e1, x);
                if t != NONE {
                    self.merge(f1, t);
                    continue;
                }
                let t = self.get(f1, x ^ 1);
                if t != NONE {
                    self.merge(e1, t);
                } else {
                    self.set(e1, x, f1);
                    self.set(f1, x ^ 1, e1);
                }
            }
        }
    }

    /// Traces `w` from `c` in both directions; closes a one-letter gap by
    /// deduction, otherwise defines (if allowed) or stops.
    fn scan(&mut self, c: usize, w: &[u32], define: bool) -> Result<(), Full> {
        if w.is_empty() {
            return Ok(());
        }
        let (mut f, mut b) = (c, c);
        let (mut i, mut j) = (0usize, w.len() - 1);
        loop {
            while i <= j && self.get(f, w[i]) != NONE {
                f = self.get(f, w[i]);
                i += 1;
            }
            if i > j {
                if f != b {
                    self.coincidence(f, b);
                }
                return Ok(());
            }
            while j >= i && self.get(b, w[j] ^ 1) != NONE {
                b = self.get(b, w[j] ^ 1);
                if j == 0 {
                    // Whole word traced backwards; i is 0 here.
                    self.coincidence(f, b);
                    return Ok(());
                }
                j -= 1;
            }
            if j < i {
                self.coincidence(f, b);
                return Ok(());
            }
            if i == j {
                self.set(f, w[i], b);
                self.set(b, w[i] ^ 1, f);
                return Ok(());
            }
            if !define {
                return Ok(());
            }
            self.define(f, w[i])?;
        }
    }

    fn process(&mut self, c: usize) -> Result<(), Full> {
        for r in self.relators {
            self.scan(c, r, true)?;
            if !self.is_live(c) {
                return Ok(());
            }
        }
        for x in 0..self.cols as u32 {
            if self.get(c, x) == NONE {
                self.define(c, x)?;
            }
        }
        Ok(())
    }

    fn lookahead(&mut self) {
        for w in self.subgroup {
            let _ = self.scan(0, w, false);
        }
        for c in 0..self.p.len() {
            for r in self.relators {
                if !self.is_live(c) {
                    break;
                }
                let _ = self.scan(c, r, false);
            }
        }
    }

    /// Drops dead rows, preserving the order of live cosets. Returns the
    /// old-to-new index map.
    fn compact(&mut self) -> Vec<usize> {
        let n = self.p.len();
        let mut map = vec![NONE; n];
        let mut next = 0;
        for (c, slot) in map.iter_mut().enumerate() {
            if self.p[c] == c {
                *slot = next;
                next += 1;
            }
        }
        let mut table = Vec::with_capacity(next * self.cols);
        for c in 0..n {
            if map[c] == NONE {
                continue;
            }
            for x in 0..self.cols as u32 {
                let t = self.get(c, x);
                table.push(if t == NONE { NONE } else { map[self.rep(t)] });
            }
        }
        self.table = table;
        self.p = (0..next).collect();
        self.live = next;
        map
    }

    fn is_closed(&self) -> bool {
        let n = self.p.len();
        if self.table.contains(&NONE) {
            return false;
        }
        let walk = |c: usize, w: &[u32]| w.iter().fold(c, |c, &x| self.get(c, x));
        self.subgroup.iter().all(|w| walk(0, w) == 0) && (0..n).all(|c| self.relators.iter().all(|r| walk(c, r) == c))
    }

    /// Lookahead plus compaction. Returns the new scan position for `c`.
    fn make_room(&mut self, c: usize) -> Result<usize, SchreierError> {
        self.lookahead();
        let map = self.compact();
        if self.live >= self.cap && !self.is_closed() {
            return Err(SchreierError::CapExceeded { cap: self.cap });
        }
        Ok(map[..c.min(map.len())].iter().filter(|&&m| m != NONE).count())
    }

    fn run(&mut self) -> Result<(), SchreierError> {
        let subgroup = self.subgroup;
        'subgroup: loop {
            for w in subgroup {
                if self.scan(0, w, true).is_err() {
                    self.make_room(0)?;
                    continue 'subgroup;
                }
            }
            break;
        }
        loop {
            let mut c = 0;
            while c < self.p.len() {
                if !self.is_live(c) {
                    c += 1;
                    continue;
                }
                match self.process(c) {
                    Ok(()) => c += 1,
                    Err(Full) => {
                        c = self.make_room(c)?;
                        if self.is_closed() {
                            return Ok(());
                        }
                    }
                }
            }
            self.compact();
            if self.is_closed() {
                return Ok(());
            }
        }
    }

    /// Renumbers cosets in BFS order from the root, scanning columns in
    /// letter order, and returns one permutation per generator.
    fn standardized(&self) -> Vec<Vec<usize>> {
        let n = self.p.len();
        let mut order = Vec::with_capacity(n);
        let mut new_index = vec![NONE; n];
        new_index[0] = 0;
        order.push(0);
        let mut i = 0;
        while i < order.len() {
            let c = order[i];
            i += 1;
            for x in 0..self.cols as u32 {
                let d = self.get(c, x);
                if new_index[d] == NONE {
                    new_index[d] = order.len();
                    order.push(d);
                }
            }
        }
        (0..self.cols / 2)
            .map(|g| order.iter().map(|&c| new_index[self.get(c, 2 * g as u32)]).collect())
            .collect()
    }
}

fn check_alphabet(w: &Word, g: usize) -> Result<Vec<u32>, SchreierError> {
    if w.letters().iter().any(|&l| (l >> 1) as usize >= g) {
        return Err(SchreierError::Invalid("word uses a letter outside the alphabet".into()));
    }
    Ok(w.free_reduce().0)
}

/// Enumerates the cosets of the subgroup generated by `subgroup` in the
/// group presented by `p`, returning the standardized coset table as a
/// Schreier graph. Fails with `CapExceeded` if more than `max_cosets` rows
/// would be needed, which includes every infinite-index case.
pub fn todd_coxeter(p: &Presentation, subgroup: &[Word], max_cosets: usize) -> Result<SchreierGraph, SchreierError> {
    let g = p.generator_count();
    if g == 0 {
        return Err(SchreierError::Invalid("presentation has no generators".into()));
    }
    let relators = p
        .relators
        .iter()
        .map(|r| check_alphabet(r, g))
        .collect::<Result<Vec<_>, _>>()?;
    let subgroup = subgroup
        .iter()
        .map(|w| check_alphabet(w, g))
        .collect::<Result<Vec<_>, _>>()?;
    let mut e = Enumerator::new(2 * g, max_cosets.max(1), &relators, &subgroup);
    e.run()?;
    SchreierGraph::new(p.generators.clone(), e.standardized())
}
