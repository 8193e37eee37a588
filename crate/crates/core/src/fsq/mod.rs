//! Binary frequency squares and sets of mutually orthogonal frequency squares.
//!
//! A square of order `n` is stored row by row, one `u128` word per row with
//! bit `c` holding the entry in column `c`. All balance and orthogonality
//! checks reduce to popcounts over these words.

mod canon;
mod format;
mod iso;

pub use canon::{are_isomorphic, canonical_form, canonical_form_bounded, CanonicalForm};
pub use format::{
    decode_superposition, encode_superposition, parse_fsq, write_fsq, write_fsq_decimal,
    FsqEncoding,
};
pub use iso::{apply_isomorphism, Isomorphism};

pub(crate) use format::content_lines;

use std::fmt;

use thiserror::Error;

/// One row of a square; bit `c` is column `c`.
pub type Row = u128;

/// Largest order representable by a single row word.
pub const MAX_ORDER: usize = 128;

/// Default bound on the order accepted by canonicalization.
pub const CANONICAL_ORDER_LIMIT: usize = 10;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FsqError {
    #[error("order {0} is odd")]
    OddOrder(usize),
    #[error("order {0} is outside the supported range 1..={MAX_ORDER}")]
    UnsupportedOrder(usize),
    #[error("row {0} is unbalanced")]
    RowUnbalanced(usize),
    #[error("column {0} is unbalanced")]
    ColUnbalanced(usize),
    #[error("orders differ ({0} vs {1})")]
    OrderMismatch(usize, usize),
    #[error("entry {value} at ({row},{col}) does not fit in {k} bits")]
    EntryOutOfRange {
        row: usize,
        col: usize,
        value: u128,
        k: usize,
    },
    #[error("square index subset is empty")]
    EmptySubset,
    #[error("square index {0} out of range")]
    SquareIndex(usize),
    #[error("isomorphism dimensions do not match the set: {0}")]
    DimensionMismatch(String),
    #[error("order {order} exceeds the canonicalization bound {bound}")]
    OrderTooLarge { order: usize, bound: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Mask with the low `n` bits set.
#[inline]
pub fn row_mask(n: usize) -> Row {
    if n >= 128 {
        Row::MAX
    } else {
        (1u128 << n) - 1
    }
}

/// An `n x n` binary matrix without any balance requirement.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitMatrix {
    n: usize,
    rows: Vec<Row>,
}

impl BitMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n <= MAX_ORDER, "order {n} too large");
        BitMatrix { n, rows: vec![0; n] }
    }

    /// Builds a matrix from row words; bits above column `n` are cleared.
    pub fn from_rows(n: usize, rows: Vec<Row>) -> Self {
        assert!(n <= MAX_ORDER, "order {n} too large");
        assert_eq!(rows.len(), n, "expected {n} rows");
        let mask = row_mask(n);
        BitMatrix {
            n,
            rows: rows.into_iter().map(|r| r & mask).collect(),
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = BitMatrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                if f(r, c) {
                    m.rows[r] |= 1 << c;
                }
            }
        }
        m
    }

    /// Builds a matrix from nested 0/1 values.
    pub fn from_bits<R: AsRef<[u8]>>(bits: &[R]) -> Self {
        let n = bits.len();
        BitMatrix::from_fn(n, |r, c| {
            let row = bits[r].as_ref();
            assert_eq!(row.len(), n, "row {r} has the wrong length");
            row[c] != 0
        })
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    #[inline]
    pub fn row(&self, r: usize) -> Row {
        self.rows[r]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.rows[r] >> c) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        if v {
            self.rows[r] |= 1 << c;
        } else {
            self.rows[r] &= !(1 << c);
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        self.rows[r] ^= 1 << c;
    }

    pub fn set_row(&mut self, r: usize, row: Row) {
        self.rows[r] = row & row_mask(self.n);
    }

    pub fn row_ones(&self, r: usize) -> usize {
        self.rows[r].count_ones() as usize
    }

    pub fn col_ones(&self, c: usize) -> usize {
        self.rows.iter().filter(|&&row| (row >> c) & 1 == 1).count()
    }

    pub fn ones(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn complement(&self) -> BitMatrix {
        let mask = row_mask(self.n);
        BitMatrix {
            n: self.n,
            rows: self.rows.iter().map(|r| !r & mask).collect(),
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        BitMatrix::from_fn(self.n, |r, c| self.get(c, r))
    }

    pub fn xor(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.n, other.n);
        BitMatrix {
            n: self.n,
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a ^ b)
                .collect(),
        }
    }

    /// Permutes rows and columns: entry `(r, c)` of the result is entry
    /// `(row_perm[r], col_perm[c])` of `self`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> BitMatrix {
        BitMatrix::from_fn(self.n, |r, c| self.get(row_perm[r], col_perm[c]))
    }

    /// First unbalanced row or column, 1-based, if any.
    pub fn balance_error(&self) -> Option<FsqError> {
        if self.n % 2 == 1 {
            return Some(FsqError::OddOrder(self.n));
        }
        let half = self.n / 2;
        if let Some(r) = (0..self.n).find(|&r| self.row_ones(r) != half) {
            return Some(FsqError::RowUnbalanced(r + 1));
        }
        if let Some(c) = (0..self.n).find(|&c| self.col_ones(c) != half) {
            return Some(FsqError::ColUnbalanced(c + 1));
        }
        None
    }

    pub fn is_balanced(&self) -> bool {
        self.balance_error().is_none()
    }

    pub fn to_bits(&self) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|r| (0..self.n).map(|c| self.get(r, c) as u8).collect())
            .collect()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix({})", self.n)?;
        for r in 0..self.n {
            for c in 0..self.n {
                f.write_str(if self.get(r, c) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// A binary frequency square of type F(n; n/2): every row and column holds
/// exactly `n/2` ones.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrequencySquare(BitMatrix);

impl FrequencySquare {
    /// Validates a matrix as a frequency square.
    pub fn new(matrix: BitMatrix) -> Result<Self, FsqError> {
        match matrix.balance_error() {
            Some(e) => Err(e),
            None => Ok(FrequencySquare(matrix)),
        }
    }

    pub fn from_bits<R: AsRef<[u8]>>(bits: &[R]) -> Result<Self, FsqError> {
        FrequencySquare::new(BitMatrix::from_bits(bits))
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> BitMatrix {
        self.0
    }

    pub fn complement(&self) -> FrequencySquare {
        FrequencySquare(self.0.complement())
    }

    pub fn lambda(&self) -> usize {
        self.0.order() / 2
    }
}

impl std::ops::Deref for FrequencySquare {
    type Target = BitMatrix;
    fn deref(&self) -> &BitMatrix {
        &self.0
    }
}

impl fmt::Debug for FrequencySquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An ordered list of squares of a common order. The squares are not
/// required to be balanced or orthogonal; [`verify_mofs`] decides that.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MofsSet {
    order: usize,
    squares: Vec<BitMatrix>,
}

impl MofsSet {
    pub fn new(order: usize, squares: Vec<BitMatrix>) -> Result<Self, FsqError> {
        if order == 0 || order > MAX_ORDER {
            return Err(FsqError::UnsupportedOrder(order));
        }
        for sq in &squares {
            if sq.order() != order {
                return Err(FsqError::OrderMismatch(order, sq.order()));
            }
        }
        Ok(MofsSet { order, squares })
    }

    pub fn empty(order: usize) -> Self {
        MofsSet {
            order,
            squares: Vec::new(),
        }
    }

    pub fn from_squares(squares: Vec<FrequencySquare>) -> Result<Self, FsqError> {
        let order = squares
            .first()
            .map(|s| s.order())
            .ok_or(FsqError::EmptySubset)?;
        MofsSet::new(order, squares.into_iter().map(|s| s.0).collect())
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.squares.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    #[inline]
    pub fn squares(&self) -> &[BitMatrix] {
        &self.squares
    }

    #[inline]
    pub fn square(&self, i: usize) -> &BitMatrix {
        &self.squares[i]
    }

    pub fn square_mut(&mut self, i: usize) -> &mut BitMatrix {
        &mut self.squares[i]
    }

    pub fn push(&mut self, sq: BitMatrix) -> Result<(), FsqError> {
        if sq.order() != self.order {
            return Err(FsqError::OrderMismatch(self.order, sq.order()));
        }
        self.squares.push(sq);
        Ok(())
    }

    /// The sub-set formed by the given square indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<MofsSet, FsqError> {
        let mut squares = Vec::with_capacity(indices.len());
        for &i in indices {
            squares.push(self.squares.get(i).ok_or(FsqError::SquareIndex(i))?.clone());
        }
        MofsSet::new(self.order, squares)
    }

    pub fn into_squares(self) -> Vec<BitMatrix> {
        self.squares
    }

    /// Cell `(r, c)` as a tuple with square `i` in bit `i`.
    pub fn tuple(&self, r: usize, c: usize) -> u128 {
        self.squares
            .iter()
            .enumerate()
            .fold(0, |acc, (i, s)| acc | ((s.get(r, c) as u128) << i))
    }

    /// Flips every square so that cell `(0, 0)` is zero.
    pub fn standardized(&self) -> MofsSet {
        MofsSet {
            order: self.order,
            squares: self
                .squares
                .iter()
                .map(|s| if s.get(0, 0) { s.complement() } else { s.clone() })
                .collect(),
        }
    }

    pub fn is_standardized(&self) -> bool {
        self.squares.iter().all(|s| !s.get(0, 0))
    }
}

/// Superposition counts for a pair of squares.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairReport {
    pub c00: usize,
    pub c01: usize,
    pub c10: usize,
    pub c11: usize,
    pub orthogonal: bool,
}

pub fn verify_pair(f: &BitMatrix, g: &BitMatrix) -> Result<PairReport, FsqError> {
    if f.order() != g.order() {
        return Err(FsqError::OrderMismatch(f.order(), g.order()));
    }
    let n = f.order();
    let mask = row_mask(n);
    let (mut c00, mut c01, mut c10, mut c11) = (0, 0, 0, 0);
    for (&a, &b) in f.rows().iter().zip(g.rows()) {
        c11 += (a & b).count_ones() as usize;
        c10 += (a & !b & mask).count_ones() as usize;
        c01 += (!a & b & mask).count_ones() as usize;
        c00 += (!a & !b & mask).count_ones() as usize;
    }
    let quarter = n * n / 4;
    let orthogonal = n * n % 4 == 0 && [c00, c01, c10, c11].iter().all(|&x| x == quarter);
    Ok(PairReport {
        c00,
        c01,
        c10,
        c11,
        orthogonal,
    })
}

/// Orthogonality test for two balanced squares of equal order: only the
/// (1,1) count needs checking.
#[inline]
pub fn balanced_orthogonal(f: &[Row], g: &[Row]) -> bool {
    let n = f.len();
    let target = (n * n / 4) as u32;
    f.iter()
        .zip(g)
        .map(|(a, b)| (a & b).count_ones())
        .sum::<u32>()
        == target
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// Square (1-based) whose order is odd.
    OddOrder { square: usize },
    /// Row (1-based) of a square with the wrong number of ones.
    Row {
        square: usize,
        row: usize,
        ones: usize,
    },
    /// Column (1-based) of a square with the wrong number of ones.
    Col {
        square: usize,
        col: usize,
        ones: usize,
    },
    /// A non-orthogonal pair of squares (1-based indices).
    Pair {
        first: usize,
        second: usize,
        report: PairReport,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OddOrder { square } => write!(f, "square {square}: odd order"),
            Violation::Row { square, row, ones } => {
                write!(f, "square {square}: row {row} has {ones} ones")
            }
            Violation::Col { square, col, ones } => {
                write!(f, "square {square}: column {col} has {ones} ones")
            }
            Violation::Pair {
                first,
                second,
                report,
            } => write!(
                f,
                "squares {first},{second} not orthogonal (00:{} 01:{} 10:{} 11:{})",
                report.c00, report.c01, report.c10, report.c11
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks balance of every square and orthogonality of every pair.
pub fn verify_mofs(set: &MofsSet) -> ValidationReport {
    let n = set.order();
    let half = n / 2;
    let mut violations = Vec::new();
    for (i, sq) in set.squares().iter().enumerate() {
        if n % 2 == 1 {
            violations.push(Violation::OddOrder { square: i + 1 });
            continue;
        }
        for r in 0..n {
            let ones = sq.row_ones(r);
            if ones != half {
                violations.push(Violation::Row {
                    square: i + 1,
                    row: r + 1,
                    ones,
                });
            }
        }
        for c in 0..n {
            let ones = sq.col_ones(c);
            if ones != half {
                violations.push(Violation::Col {
                    square: i + 1,
                    col: c + 1,
                    ones,
                });
            }
        }
    }
    let squares = set.squares();
    for i in 0..squares.len() {
        for j in i + 1..squares.len() {
            let report = verify_pair(&squares[i], &squares[j]).expect("orders checked on build");
            if !report.orthogonal {
                violations.push(Violation::Pair {
                    first: i + 1,
                    second: j + 1,
                    report,
                });
            }
        }
    }
    ValidationReport { violations }
}

/// Triple test: the eight superposition counts must satisfy
/// `x000 = x011 = x101 = x110` and `x001 = x010 = x100 = x111`.
pub fn verify_triple(f1: &BitMatrix, f2: &BitMatrix, f3: &BitMatrix) -> Result<bool, FsqError> {
    let n = f1.order();
    for g in [f2, f3] {
        if g.order() != n {
            return Err(FsqError::OrderMismatch(n, g.order()));
        }
    }
    let mask = row_mask(n);
    let mut x = [0usize; 8];
    for r in 0..n {
        let (a, b, c) = (f1.row(r), f2.row(r), f3.row(r));
        for (t, slot) in x.iter_mut().enumerate() {
            let pa = if t & 4 != 0 { a } else { !a & mask };
            let pb = if t & 2 != 0 { b } else { !b & mask };
            let pc = if t & 1 != 0 { c } else { !c & mask };
            *slot += (pa & pb & pc).count_ones() as usize;
        }
    }
    let even = [x[0b000], x[0b011], x[0b101], x[0b110]];
    let odd = [x[0b001], x[0b010], x[0b100], x[0b111]];
    Ok(even.iter().all(|&v| v == even[0]) && odd.iter().all(|&v| v == odd[0]))
}

/// Entrywise XOR of the squares with the given (0-based) indices.
pub fn z2_subset_sum(set: &MofsSet, subset: &[usize]) -> Result<BitMatrix, FsqError> {
    if subset.is_empty() {
        return Err(FsqError::EmptySubset);
    }
    let mut acc = BitMatrix::zeros(set.order());
    for &i in subset {
        let sq = set.squares().get(i).ok_or(FsqError::SquareIndex(i))?;
        for r in 0..set.order() {
            acc.rows[r] ^= sq.row(r);
        }
    }
    Ok(acc)
}

/// Entrywise XOR of every square in the set.
pub fn z2_sum(set: &MofsSet) -> BitMatrix {
    let mut acc = BitMatrix::zeros(set.order());
    for sq in set.squares() {
        for r in 0..set.order() {
            acc.rows[r] ^= sq.row(r);
        }
    }
    acc
}

/// `counts[i]` is the number of cells whose k-tuple holds exactly `i` ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperpositionProfile {
    pub order: usize,
    pub counts: Vec<u64>,
}

impl SuperpositionProfile {
    pub fn k(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `sum i * x_i`
    pub fn weighted_sum(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &x)| i as u64 * x)
            .sum()
    }

    /// `sum C(i,2) * x_i`
    pub fn pair_sum(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &x)| (i as u64) * (i as u64).saturating_sub(1) / 2 * x)
            .sum()
    }

    /// Checks the three counting identities a valid k-MOFS(2λ) must meet:
    /// `Σx_i = n²`, `Σ i·x_i = 2kλ²` and `Σ C(i,2)·x_i = C(k,2)·λ²`.
    pub fn identities_hold(&self) -> bool {
        let n = self.order as u64;
        let k = self.k() as u64;
        let lambda = n / 2;
        self.total() == n * n
            && self.weighted_sum() == 2 * k * lambda * lambda
            && self.pair_sum() == k * k.saturating_sub(1) / 2 * lambda * lambda
    }
}

pub fn superposition_profile(set: &MofsSet) -> SuperpositionProfile {
    let n = set.order();
    let k = set.len();
    let mut counts = vec![0u64; k + 1];
    for r in 0..n {
        for c in 0..n {
            let ones = set.squares().iter().filter(|s| s.get(r, c)).count();
            counts[ones] += 1;
        }
    }
    SuperpositionProfile { order: n, counts }
}
