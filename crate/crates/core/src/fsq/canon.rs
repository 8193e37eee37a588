//! Canonical forms of sets of squares under the full isomorphism group
//! (row and column permutations, transposition, per-square complementation
//! and square reordering).
//!
//! Cells are visited in row-major order of the relabelled set. Every square
//! is complemented so that the first visited cell reads zero, and the squares
//! are kept in an ordered partition that is refined cell by cell (squares
//! reading 0 before squares reading 1). Each visited cell therefore
//! contributes, for every part of the partition, the number of its squares
//! reading 1. The canonical form is the lexicographically least contribution
//! sequence over all relabellings. Row 0 is built one column at a time; once
//! the column order is fixed the remaining rows are chosen whole. At every
//! step only the candidates with the least contribution are expanded.

use std::cmp::Ordering;

use super::{FsqError, MofsSet, CANONICAL_ORDER_LIMIT};

/// Byte string identifying an isomorphism class. Equal forms mean
/// isomorphic sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm(pub Vec<u8>);

impl CanonicalForm {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn canonical_form(set: &MofsSet) -> Result<CanonicalForm, FsqError> {
    canonical_form_bounded(set, CANONICAL_ORDER_LIMIT)
}

pub fn canonical_form_bounded(set: &MofsSet, bound: usize) -> Result<CanonicalForm, FsqError> {
    let n = set.order();
    if n > bound {
        return Err(FsqError::OrderTooLarge { order: n, bound });
    }
    let k = set.len();
    if k > 128 {
        return Err(FsqError::DimensionMismatch(format!(
            "canonical forms support at most 128 squares, got {k}"
        )));
    }
    let mut search = Search {
        n,
        k,
        cells: Vec::new(),
        row_twin: Vec::new(),
        col_twin: Vec::new(),
        best: None,
    };
    for transpose in [false, true] {
        search.load(set, transpose);
        search.run();
    }
    Ok(search.finish())
}

pub fn are_isomorphic(a: &MofsSet, b: &MofsSet) -> Result<bool, FsqError> {
    if a.order() != b.order() || a.len() != b.len() {
        return Ok(false);
    }
    Ok(canonical_form(a)? == canonical_form(b)?)
}

#[derive(Clone)]
struct State {
    comp: u128,
    rows: Vec<usize>,
    cols: Vec<usize>,
    classes: Vec<u128>,
    seq: Vec<u8>,
}

struct Leaf {
    seq: Vec<u8>,
    bits: Vec<u8>,
}

struct Search {
    n: usize,
    k: usize,
    cells: Vec<u128>,
    row_twin: Vec<usize>,
    col_twin: Vec<usize>,
    best: Option<Leaf>,
}

/// Appends the contribution of a cell and returns the refined partition.
fn refine(classes: &[u128], value: u128, out: &mut Vec<u8>) -> Vec<u128> {
    let mut next = Vec::with_capacity(classes.len() + 1);
    for &m in classes {
        let ones = m & value;
        let zeros = m & !value;
        out.push(ones.count_ones() as u8);
        if zeros != 0 {
            next.push(zeros);
        }
        if ones != 0 {
            next.push(ones);
        }
    }
    next
}

fn cmp_extended(seq: &[u8], tail: &[u8], best: &[u8]) -> Ordering {
    let head = seq.len().min(best.len());
    match seq[..head].cmp(&best[..head]) {
        Ordering::Equal => {}
        other => return other,
    }
    let rest = &best[head..];
    let m = tail.len().min(rest.len());
    tail[..m].cmp(&rest[..m])
}

impl Search {
    fn load(&mut self, set: &MofsSet, transpose: bool) {
        let n = self.n;
        self.cells = (0..n * n)
            .map(|idx| {
                let (r, c) = (idx / n, idx % n);
                if transpose {
                    set.tuple(c, r)
                } else {
                    set.tuple(r, c)
                }
            })
            .collect();
        self.row_twin = (0..n)
            .map(|r| {
                (0..r)
                    .find(|&q| self.cells[q * n..q * n + n] == self.cells[r * n..r * n + n])
                    .unwrap_or(r)
            })
            .collect();
        self.col_twin = (0..n)
            .map(|c| {
                (0..c)
                    .find(|&d| (0..n).all(|r| self.cells[r * n + c] == self.cells[r * n + d]))
                    .unwrap_or(c)
            })
            .collect();
    }

    #[inline]
    fn cell(&self, r: usize, c: usize) -> u128 {
        self.cells[r * self.n + c]
    }

    fn run(&mut self) {
        let n = self.n;
        let all = if self.k == 128 {
            u128::MAX
        } else {
            (1u128 << self.k) - 1
        };
        for r0 in 0..n {
            if self.row_twin[r0] != r0 {
                continue;
            }
            for c0 in 0..n {
                if self.col_twin[c0] != c0 {
                    continue;
                }
                let comp = self.cell(r0, c0);
                let classes = if all == 0 { Vec::new() } else { vec![all] };
                let mut seq = Vec::new();
                let classes = refine(&classes, 0, &mut seq);
                let st = State {
                    comp,
                    rows: vec![r0],
                    cols: vec![c0],
                    classes,
                    seq,
                };
                if self.prune(&st.seq, &[]) {
                    continue;
                }
                self.descend(st);
            }
        }
    }

    fn prune(&self, seq: &[u8], tail: &[u8]) -> bool {
        match &self.best {
            Some(best) => cmp_extended(seq, tail, &best.seq) == Ordering::Greater,
            None => false,
        }
    }

    fn descend(&mut self, st: State) {
        let n = self.n;
        if st.rows.len() == 1 && st.cols.len() < n {
            let r0 = st.rows[0];
            let mut options: Vec<(usize, Vec<u8>, Vec<u128>)> = Vec::new();
            for c in 0..n {
                if st.cols.contains(&c) {
                    continue;
                }
                let twin = self.col_twin[c];
                if options.iter().any(|(d, _, _)| self.col_twin[*d] == twin) {
                    continue;
                }
                let mut contrib = Vec::with_capacity(st.classes.len());
                let classes = refine(&st.classes, self.cell(r0, c) ^ st.comp, &mut contrib);
                options.push((c, contrib, classes));
            }
            self.expand(st, options, |st, c| st.cols.push(c));
        } else if st.rows.len() < n {
            let mut options: Vec<(usize, Vec<u8>, Vec<u128>)> = Vec::new();
            for r in 0..n {
                if st.rows.contains(&r) {
                    continue;
                }
                let twin = self.row_twin[r];
                if options.iter().any(|(q, _, _)| self.row_twin[*q] == twin) {
                    continue;
                }
                let mut contrib = Vec::with_capacity(n * st.classes.len());
                let mut classes = st.classes.clone();
                for &c in &st.cols {
                    classes = refine(&classes, self.cell(r, c) ^ st.comp, &mut contrib);
                }
                options.push((r, contrib, classes));
            }
            self.expand(st, options, |st, r| st.rows.push(r));
        } else {
            self.leaf(&st);
        }
    }

    fn expand(
        &mut self,
        st: State,
        options: Vec<(usize, Vec<u8>, Vec<u128>)>,
        extend: impl Fn(&mut State, usize),
    ) {
        let Some(min) = options.iter().map(|(_, c, _)| c).min().cloned() else {
            return;
        };
        if self.prune(&st.seq, &min) {
            return;
        }
        for (choice, contrib, classes) in options {
            if contrib != min {
                continue;
            }
            // an earlier sibling may have improved the bound
            if self.prune(&st.seq, &contrib) {
                return;
            }
            let mut next = st.clone();
            extend(&mut next, choice);
            next.seq.extend_from_slice(&contrib);
            next.classes = classes;
            self.descend(next);
        }
    }

    fn leaf(&mut self, st: &State) {
        let better = match &self.best {
            Some(best) => st.seq < best.seq,
            None => true,
        };
        if !better {
            return;
        }
        let order: Vec<usize> = st
            .classes
            .iter()
            .flat_map(|&m| (0..self.k).filter(move |&i| (m >> i) & 1 == 1))
            .collect();
        let mut bits = Vec::with_capacity(self.n * self.n * self.k);
        for &r in &st.rows {
            for &c in &st.cols {
                let v = self.cell(r, c) ^ st.comp;
                bits.extend(order.iter().map(|&i| ((v >> i) & 1) as u8));
            }
        }
        self.best = Some(Leaf {
            seq: st.seq.clone(),
            bits,
        });
    }

    fn finish(self) -> CanonicalForm {
        let mut out = Vec::new();
        out.extend_from_slice(&(self.n as u16).to_le_bytes());
        out.extend_from_slice(&(self.k as u16).to_le_bytes());
        if let Some(best) = self.best {
            for chunk in best.bits.chunks(8) {
                let mut byte = 0u8;
                for (i, &b) in chunk.iter().enumerate() {
                    byte |= b << (7 - i);
                }
                out.push(byte);
            }
        }
        CanonicalForm(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsq::{apply_isomorphism, BitMatrix, Isomorphism};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn block4() -> BitMatrix {
        BitMatrix::from_bits(&[[0, 0, 1, 1], [0, 0, 1, 1], [1, 1, 0, 0], [1, 1, 0, 0]])
    }

    fn circulant4() -> BitMatrix {
        BitMatrix::from_bits(&[[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1], [1, 0, 0, 1]])
    }

    #[test]
    fn order_bound_enforced() {
        let s = MofsSet::new(12, vec![BitMatrix::zeros(12)]).unwrap();
        assert_eq!(
            canonical_form(&s).unwrap_err(),
            FsqError::OrderTooLarge {
                order: 12,
                bound: 10
            }
        );
    }

    #[test]
    fn distinguishes_the_two_order_four_square_classes() {
        let a = MofsSet::new(4, vec![block4()]).unwrap();
        let b = MofsSet::new(4, vec![circulant4()]).unwrap();
        assert!(!are_isomorphic(&a, &b).unwrap());
        let b2 = MofsSet::new(4, vec![circulant4().complement().transpose()]).unwrap();
        assert!(are_isomorphic(&b, &b2).unwrap());
    }

    #[test]
    fn invariant_under_random_isomorphisms() {
        let s = MofsSet::new(4, vec![block4(), circulant4()]).unwrap();
        let base = canonical_form(&s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let iso = Isomorphism::random(4, 2, &mut rng);
            let t = apply_isomorphism(&s, &iso).unwrap();
            assert_eq!(canonical_form(&t).unwrap(), base);
        }
    }
}
