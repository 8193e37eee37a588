//! Relations on sets of MOFS: detection through block-structured Z2-sums,
//! parity obstructions, maximality certificates and the small-k
//! constructions achieving every possible relation.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::constructions::bachelor_square;
use crate::fsq::{row_mask, BitMatrix, FsqError, MofsSet, Row};

/// Largest set size for which the subset scan is attempted.
pub const SUBSET_SCAN_LIMIT: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RelationError {
    #[error("subset scan over {0} squares exceeds the limit of {SUBSET_SCAN_LIMIT}")]
    SubsetScanTooLarge(usize),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),
    #[error("relation parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Fsq(#[from] FsqError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelationKind {
    Trivial,
    NonTrivial,
    Full,
}

/// A relation in normal form. Indices are 0-based; `squares` lists the
/// squares whose symbol set is `{1}`, the rest having the empty set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub squares: Vec<usize>,
    /// Number of squares in the set the relation lives on.
    pub set_size: usize,
}

impl Relation {
    pub fn signature(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn is_full(&self) -> bool {
        self.set_size > 0 && self.squares.len() == self.set_size
    }

    pub fn kind(&self) -> RelationKind {
        if self.squares.is_empty() {
            RelationKind::Trivial
        } else if self.is_full() {
            RelationKind::Full
        } else {
            RelationKind::NonTrivial
        }
    }

    /// True when the signature is `(a, b)` or its complement pair in order `n`.
    pub fn has_signature(&self, n: usize, a: usize, b: usize) -> bool {
        let (x, y) = self.signature();
        (x, y) == (a, b) || (n - x, n - y) == (a, b)
    }

    /// Checks the even-sum condition at every cell.
    pub fn holds_on(&self, set: &MofsSet) -> bool {
        let n = set.order();
        if self.squares.iter().any(|&i| i >= set.len()) {
            return false;
        }
        let col_mask = self.cols.iter().fold(0 as Row, |m, &c| m | 1 << c);
        (0..n).all(|r| {
            let mut acc = set
                .squares()
                .iter()
                .enumerate()
                .filter(|(i, _)| self.squares.contains(i))
                .fold(col_mask, |a, (_, s)| a ^ s.row(r));
            if self.rows.contains(&r) {
                acc ^= row_mask(n);
            }
            acc & row_mask(n) == 0
        })
    }
}

fn one_based(v: &[usize]) -> String {
    if v.is_empty() {
        return "-".into();
    }
    v.iter()
        .map(|x| (x + 1).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.signature();
        write!(
            f,
            "relation a={a} b={b} rows={} cols={} squares={} full={}",
            one_based(&self.rows),
            one_based(&self.cols),
            one_based(&self.squares),
            self.is_full() as u8
        )
    }
}

impl FromStr for Relation {
    type Err = RelationError;

    /// Parses the text form. The set size is taken from `full=1` (the square
    /// list length) and otherwise left as the largest listed square index.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut fields = s.split_whitespace();
        if fields.next() != Some("relation") {
            return Err(RelationError::Parse("missing `relation` keyword".into()));
        }
        let mut rel = Relation {
            rows: vec![],
            cols: vec![],
            squares: vec![],
            set_size: 0,
        };
        let (mut a, mut b, mut full) = (None, None, None);
        for field in fields {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| RelationError::Parse(format!("bad field `{field}`")))?;
            let list = || -> Result<Vec<usize>, RelationError> {
                if value == "-" {
                    return Ok(vec![]);
                }
                value
                    .split(',')
                    .map(|x| match x.parse::<usize>() {
                        Ok(v) if v >= 1 => Ok(v - 1),
                        _ => Err(RelationError::Parse(format!("bad index `{x}`"))),
                    })
                    .collect()
            };
            let num = || {
                value
                    .parse::<usize>()
                    .map_err(|_| RelationError::Parse(format!("bad number `{value}`")))
            };
            match key {
                "a" => a = Some(num()?),
                "b" => b = Some(num()?),
                "rows" => rel.rows = list()?,
                "cols" => rel.cols = list()?,
                "squares" => rel.squares = list()?,
                "full" => full = Some(num()? == 1),
                _ => return Err(RelationError::Parse(format!("unknown field `{key}`"))),
            }
        }
        if a != Some(rel.rows.len()) || b != Some(rel.cols.len()) {
            return Err(RelationError::Parse("signature disagrees with lists".into()));
        }
        rel.set_size = match full {
            Some(true) => rel.squares.len(),
            _ => rel.squares.iter().max().map_or(0, |m| m + 1),
        };
        Ok(rel)
    }
}

/// Decomposes `m` as `m[r][c] = [r in X1] xor [c in X2]` and returns
/// `(X1, X2)` normalized so that column 0 lies in `X2`.
pub fn block_structure(m: &BitMatrix) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = m.order();
    if n == 0 {
        return Some((vec![], vec![]));
    }
    let mask = row_mask(n);
    let row0 = m.row(0);
    let a0 = !m.get(0, 0);
    let mut rows = Vec::new();
    for r in 0..n {
        let row = m.row(r);
        let flipped = if row == row0 {
            false
        } else if row == !row0 & mask {
            true
        } else {
            return None;
        };
        if a0 ^ flipped {
            rows.push(r);
        }
    }
    let cols = (0..n).filter(|&c| m.get(0, c) ^ a0).collect();
    Some((rows, cols))
}

fn xor_rows(acc: &mut [Row], sq: &BitMatrix) {
    for (a, &r) in acc.iter_mut().zip(sq.rows()) {
        *a ^= r;
    }
}

fn relation_from(sum: &[Row], n: usize, squares: Vec<usize>, k: usize) -> Option<Relation> {
    let m = BitMatrix::from_rows(n, sum.to_vec());
    block_structure(&m).map(|(rows, cols)| Relation {
        rows,
        cols,
        squares,
        set_size: k,
    })
}

/// Finds a relation whose Z2-sum is block structured. With `full_only` only
/// the sum of all squares is tested; otherwise subsets are scanned by size
/// and then lexicographically, and the first hit is returned.
pub fn find_relation(set: &MofsSet, full_only: bool) -> Result<Option<Relation>, RelationError> {
    let n = set.order();
    let k = set.len();
    if k == 0 {
        return Ok(None);
    }
    if full_only {
        let mut sum = vec![0; n];
        for sq in set.squares() {
            xor_rows(&mut sum, sq);
        }
        return Ok(relation_from(&sum, n, (0..k).collect(), k));
    }
    if k > SUBSET_SCAN_LIMIT {
        return Err(RelationError::SubsetScanTooLarge(k));
    }
    for size in 1..=k {
        let mut chosen = Vec::with_capacity(size);
        let mut sum = vec![0; n];
        if let Some(rel) = scan_subsets(set, size, 0, &mut chosen, &mut sum) {
            return Ok(Some(rel));
        }
    }
    Ok(None)
}

fn scan_subsets(
    set: &MofsSet,
    size: usize,
    start: usize,
    chosen: &mut Vec<usize>,
    sum: &mut [Row],
) -> Option<Relation> {
    if chosen.len() == size {
        return relation_from(sum, set.order(), chosen.clone(), set.len());
    }
    let remaining = size - chosen.len();
    for i in start..=set.len() - remaining {
        chosen.push(i);
        xor_rows(sum, set.square(i));
        let hit = scan_subsets(set, size, i + 1, chosen, sum);
        xor_rows(sum, set.square(i));
        chosen.pop();
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// The obstruction that rules out a full relation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Obstruction {
    /// λ odd and k not 1 mod 4.
    OddLambdaWrongK,
    /// |X1| or |X2| differs in parity from λk.
    Parity,
    /// λ odd, k ≡ 1 or 5 mod 8 and |X1||X2| has the wrong residue mod 4.
    ProductResidue,
}

impl fmt::Display for Obstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Obstruction::OddLambdaWrongK => "lambda odd and k not 1 mod 4",
            Obstruction::Parity => "|X1| and |X2| must have the parity of lambda*k",
            Obstruction::ProductResidue => "|X1||X2| has the wrong residue mod 4",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Infeasible(Obstruction),
}

/// Verdict of the necessary conditions for a full `(a, b)`-relation on a
/// `k`-MOFS(2λ). `Feasible` makes no existence claim.
pub fn relation_feasibility(
    k: usize,
    lambda: usize,
    a: usize,
    b: usize,
) -> Result<Feasibility, RelationError> {
    if k == 0 || lambda == 0 {
        return Err(RelationError::OutOfRange("k and lambda must be positive".into()));
    }
    if a > 2 * lambda || b > 2 * lambda {
        return Err(RelationError::OutOfRange(format!(
            "a={a}, b={b} exceed the order {}",
            2 * lambda
        )));
    }
    let odd = lambda % 2 == 1;
    if odd && k % 4 != 1 {
        return Ok(Feasibility::Infeasible(Obstruction::OddLambdaWrongK));
    }
    let p = (lambda * k) % 2;
    if a % 2 != p || b % 2 != p {
        return Ok(Feasibility::Infeasible(Obstruction::Parity));
    }
    let ab = (a * b) % 4;
    if odd && ((k % 8 == 1 && ab != 1) || (k % 8 == 5 && ab != 3)) {
        return Ok(Feasibility::Infeasible(Obstruction::ProductResidue));
    }
    Ok(Feasibility::Feasible)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    CertifiedMaximal,
    NoCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaximalityCertificate {
    pub verdict: Verdict,
    pub witness: Option<Relation>,
}

impl MaximalityCertificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::CertifiedMaximal
    }
}

/// Certifies maximality when k and λ are odd and the set has a full relation.
pub fn certify_maximal(set: &MofsSet) -> MaximalityCertificate {
    let k = set.len();
    let n = set.order();
    let none = MaximalityCertificate {
        verdict: Verdict::NoCertificate,
        witness: None,
    };
    if k % 2 == 0 || n % 4 != 2 {
        return none;
    }
    match find_relation(set, true) {
        Ok(Some(rel)) => MaximalityCertificate {
            verdict: Verdict::CertifiedMaximal,
            witness: Some(rel),
        },
        _ => none,
    }
}

/// Fills an `n x n` superposition from row and column block sizes and a
/// table of tuples per block. Tuple bit `i` is square `i`.
fn block_superposition(
    k: usize,
    row_blocks: &[usize],
    col_blocks: &[usize],
    table: &[&[u8]],
) -> Vec<BitMatrix> {
    let n: usize = row_blocks.iter().sum();
    let expand = |blocks: &[usize]| -> Vec<usize> {
        blocks
            .iter()
            .enumerate()
            .flat_map(|(i, &s)| std::iter::repeat(i).take(s))
            .collect()
    };
    let rb = expand(row_blocks);
    let cb = expand(col_blocks);
    (0..k)
        .map(|i| BitMatrix::from_fn(n, |r, c| (table[rb[r]][cb[c]] >> i) & 1 == 1))
        .collect()
}

/// Tuples written most significant square first, e.g. `0b011` means
/// `F1 = 0, F2 = 1, F3 = 1`.
fn reverse_bits(t: u8, k: usize) -> u8 {
    (0..k).fold(0, |acc, i| acc | (((t >> (k - 1 - i)) & 1) << i))
}

const TWO_SQUARE_TABLE: [[u8; 4]; 4] = [
    [0b00, 0b11, 0b01, 0b10],
    [0b11, 0b00, 0b10, 0b01],
    [0b01, 0b10, 0b00, 0b11],
    [0b10, 0b01, 0b11, 0b00],
];

const THREE_SQUARE_TABLE: [[u8; 4]; 4] = [
    [0b000, 0b011, 0b101, 0b110],
    [0b110, 0b101, 0b011, 0b000],
    [0b101, 0b110, 0b000, 0b011],
    [0b011, 0b000, 0b110, 0b101],
];

/// A `k`-MOFS(2λ) for `k <= 3` with a full relation of signature `(a, b)`
/// on the first `a` rows and first `b` columns.
pub fn construct_small_k(
    k: usize,
    lambda: usize,
    a: usize,
    b: usize,
) -> Result<MofsSet, RelationError> {
    if lambda == 0 || 2 * lambda > crate::fsq::MAX_ORDER {
        return Err(RelationError::OutOfRange(format!("lambda={lambda}")));
    }
    let n = 2 * lambda;
    if a > n || b > n {
        return Err(RelationError::OutOfRange(format!("a={a}, b={b} exceed {n}")));
    }
    let squares = match k {
        1 => {
            if a != lambda || b != lambda {
                return Err(RelationError::InfeasibleParameters(
                    "k=1 requires a = b = lambda".into(),
                ));
            }
            vec![bachelor_square(n)?.into_matrix()]
        }
        2 => {
            if lambda % 2 != 0 || a % 2 != 0 || b % 2 != 0 {
                return Err(RelationError::InfeasibleParameters(
                    "k=2 requires lambda, a and b even".into(),
                ));
            }
            if a != lambda && b != lambda {
                return Err(RelationError::InfeasibleParameters(
                    "k=2 requires a = lambda or b = lambda".into(),
                ));
            }
            let table: Vec<Vec<u8>> = TWO_SQUARE_TABLE
                .iter()
                .map(|r| r.iter().map(|&t| reverse_bits(t, 2)).collect())
                .collect();
            let refs: Vec<&[u8]> = table.iter().map(|r| r.as_slice()).collect();
            let rows = [a / 2, a / 2, lambda - a / 2, lambda - a / 2];
            let cols = [b / 2, b / 2, lambda - b / 2, lambda - b / 2];
            block_superposition(2, &rows, &cols, &refs)
        }
        3 => {
            if lambda % 2 != 0 || a % 2 != 0 || b % 2 != 0 {
                return Err(RelationError::InfeasibleParameters(
                    "k=3 requires lambda, a and b even".into(),
                ));
            }
            three_square_array(lambda, a, b)
        }
        _ => {
            return Err(RelationError::InfeasibleParameters(format!(
                "k={k} is not in 1..=3"
            )))
        }
    };
    Ok(MofsSet::new(n, squares)?)
}

fn quarter_blocks(y: usize) -> [usize; 4] {
    let hi = y.div_ceil(4);
    let lo = y / 4;
    [hi, hi, lo, lo]
}

fn three_square_array(lambda: usize, x1: usize, x2: usize) -> Vec<BitMatrix> {
    let n = 2 * lambda;
    let even: Vec<Vec<u8>> = THREE_SQUARE_TABLE
        .iter()
        .map(|r| r.iter().map(|&t| reverse_bits(t, 3)).collect())
        .collect();
    // row blocks: 4 for the top half, 4 for the bottom; same for columns
    let mut rows = quarter_blocks(x1).to_vec();
    rows.extend(quarter_blocks(n - x1));
    let mut cols = quarter_blocks(x2).to_vec();
    cols.extend(quarter_blocks(n - x2));
    let table: Vec<Vec<u8>> = (0..8)
        .map(|i| {
            (0..8)
                .map(|j| {
                    let t = even[i % 4][j % 4];
                    if (i < 4) == (j < 4) {
                        t
                    } else {
                        t ^ 0b111
                    }
                })
                .collect()
        })
        .collect();
    let refs: Vec<&[u8]> = table.iter().map(|r| r.as_slice()).collect();
    block_superposition(3, &rows, &cols, &refs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsq::verify_mofs;

    #[test]
    fn block_structure_matches_direct_oracle_on_all_4x4() {
        for bits in 0u32..1 << 16 {
            let m = BitMatrix::from_fn(4, |r, c| (bits >> (4 * r + c)) & 1 == 1);
            let oracle = (0..4).all(|r| {
                (0..4).all(|c| !(m.get(r, c) ^ m.get(r, 0) ^ m.get(0, c) ^ m.get(0, 0)))
            });
            let found = block_structure(&m);
            assert_eq!(found.is_some(), oracle, "{m:?}");
            if let Some((rows, cols)) = found {
                assert!(cols.contains(&0));
                for r in 0..4 {
                    for c in 0..4 {
                        assert_eq!(m.get(r, c), rows.contains(&r) ^ cols.contains(&c));
                    }
                }
            }
        }
    }

    #[test]
    fn degenerate_and_identity_matrices() {
        let (rows, cols) = block_structure(&BitMatrix::zeros(4)).unwrap();
        assert_eq!((rows.len(), cols.len()), (4, 4));
        let id = BitMatrix::from_fn(6, |r, c| r == c);
        assert_eq!(block_structure(&id), None);
    }

    #[test]
    fn feasibility_examples() {
        use Feasibility::*;
        assert_eq!(relation_feasibility(5, 3, 5, 3).unwrap(), Feasible);
        assert_eq!(
            relation_feasibility(5, 3, 1, 1).unwrap(),
            Infeasible(Obstruction::ProductResidue)
        );
        for a in 0..=6 {
            for b in 0..=6 {
                assert_eq!(
                    relation_feasibility(3, 3, a, b).unwrap(),
                    Infeasible(Obstruction::OddLambdaWrongK)
                );
            }
        }
        assert_eq!(relation_feasibility(9, 3, 3, 3).unwrap(), Feasible);
        assert!(relation_feasibility(5, 3, 7, 1).is_err());
    }

    #[test]
    fn small_k_constructions_achieve_requested_signatures() {
        for lambda in 1..=6 {
            let s = construct_small_k(1, lambda, lambda, lambda).unwrap();
            assert!(verify_mofs(&s).is_valid());
            let rel = find_relation(&s, true).unwrap().unwrap();
            assert_eq!(rel.rows, (0..lambda).collect::<Vec<_>>());
            assert_eq!(rel.cols, (0..lambda).collect::<Vec<_>>());
        }
        for lambda in (2..=8).step_by(2) {
            let n = 2 * lambda;
            for a in (0..=n).step_by(2) {
                for b in (0..=n).step_by(2) {
                    if a == lambda || b == lambda {
                        let s = construct_small_k(2, lambda, a, b).unwrap();
                        assert!(verify_mofs(&s).is_valid(), "k=2 {lambda} {a} {b}");
                        let rel = find_relation(&s, true).unwrap().unwrap();
                        assert!(rel.has_signature(n, a, b));
                        assert!(rel.holds_on(&s));
                    }
                    let s = construct_small_k(3, lambda, a, b).unwrap();
                    assert!(verify_mofs(&s).is_valid(), "k=3 {lambda} {a} {b}");
                    let rel = find_relation(&s, true).unwrap().unwrap();
                    assert!(rel.has_signature(n, a, b));
                    assert!(rel.holds_on(&s));
                }
            }
        }
    }

    #[test]
    fn small_k_rejects_bad_parameters() {
        assert!(matches!(
            construct_small_k(2, 3, 2, 2),
            Err(RelationError::InfeasibleParameters(_))
        ));
        assert!(matches!(
            construct_small_k(2, 4, 2, 2),
            Err(RelationError::InfeasibleParameters(_))
        ));
        assert!(matches!(
            construct_small_k(3, 4, 3, 4),
            Err(RelationError::InfeasibleParameters(_))
        ));
        assert!(construct_small_k(4, 4, 4, 4).is_err());
    }

    #[test]
    fn relation_text_round_trip() {
        let s = construct_small_k(3, 4, 4, 2).unwrap();
        let rel = find_relation(&s, true).unwrap().unwrap();
        let text = rel.to_string();
        assert!(text.starts_with("relation a=4 b=2 rows=1,2,3,4 cols=1,2 squares=1,2,3 full=1"));
        assert_eq!(text.parse::<Relation>().unwrap(), rel);
    }

    #[test]
    fn subset_scan_limit() {
        let s = MofsSet::new(4, vec![BitMatrix::zeros(4); 25]).unwrap();
        assert_eq!(
            find_relation(&s, false),
            Err(RelationError::SubsetScanTooLarge(25))
        );
    }
}
