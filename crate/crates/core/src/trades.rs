//! Trades: per-square cell sets whose simultaneous switching keeps a set of
//! squares mutually orthogonal. Includes the basic-trade test, the trivial
//! and intercalate families, and the disjoint family whose subsets give many
//! distinct complete sets.

use std::fmt;

use thiserror::Error;

use crate::data::sha256_hex;
use crate::fsq::{row_mask, verify_mofs, write_fsq, BitMatrix, FsqError, MofsSet};

pub type Cell = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TradeViolation {
    /// A row of the first square meets the cell set in unequally many zeros and ones.
    RowBalance(usize),
    ColumnBalance(usize),
    /// A square left unchanged would lose orthogonality with the first.
    Orthogonality(usize),
    /// Switching produced a set that is not mutually orthogonal.
    Definition(String),
}

impl TradeViolation {
    /// 1 for the balance condition, 2 for the orthogonality condition, 0
    /// when only the direct switching test failed.
    pub fn condition(&self) -> u8 {
        match self {
            TradeViolation::RowBalance(_) | TradeViolation::ColumnBalance(_) => 1,
            TradeViolation::Orthogonality(_) => 2,
            TradeViolation::Definition(_) => 0,
        }
    }
}

impl fmt::Display for TradeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TradeViolation::RowBalance(r) => write!(f, "condition 1 fails on row {}", r + 1),
            TradeViolation::ColumnBalance(c) => write!(f, "condition 1 fails on column {}", c + 1),
            TradeViolation::Orthogonality(j) => write!(f, "condition 2 fails for square {}", j + 1),
            TradeViolation::Definition(why) => write!(f, "switched set is invalid: {why}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum TradeError {
    #[error("the cell set is empty")]
    EmptyCellSet,
    #[error("cell ({0},{1}) is outside the square")]
    CellOutOfRange(usize, usize),
    #[error("not a trade: {0}")]
    NotATrade(TradeViolation),
    #[error("trade does not belong to this set")]
    StaleTrade,
    #[error("square {square} has rows {} and {} neither equal nor complementary", .rows.0 + 1, .rows.1 + 1)]
    PreconditionFailed { square: usize, rows: (usize, usize) },
    #[error("square {0} has a 1 in its top-left cell")]
    NotStandardized(usize),
    #[error("trade file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Fsq(#[from] FsqError),
}

/// Cell sets `C_1, ..., C_k`, each sorted row-major, 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TradeSpec {
    pub cells: Vec<Vec<Cell>>,
    /// SHA-256 of the set the trade was validated against.
    pub fingerprint: Option<String>,
}

pub fn fingerprint(set: &MofsSet) -> String {
    sha256_hex(write_fsq(set).as_bytes())
}

impl TradeSpec {
    pub fn k(&self) -> usize {
        self.cells.len()
    }

    /// All nonempty cell sets are the same set.
    pub fn is_basic(&self) -> bool {
        let mut nonempty = self.cells.iter().filter(|c| !c.is_empty());
        match nonempty.next() {
            None => false,
            Some(first) => nonempty.all(|c| c == first),
        }
    }

    /// 0-based indices of the squares the trade changes.
    pub fn changed_squares(&self) -> Vec<usize> {
        (0..self.k()).filter(|&i| !self.cells[i].is_empty()).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("trade {}\n", self.k());
        if let Some(fp) = &self.fingerprint {
            out.push_str(&format!("fingerprint {fp}\n"));
        }
        for (i, cells) in self.cells.iter().enumerate() {
            if cells.is_empty() {
                out.push_str(&format!("{}: -\n", i + 1));
            } else {
                let list: Vec<String> =
                    cells.iter().map(|(r, c)| format!("({},{})", r + 1, c + 1)).collect();
                out.push_str(&format!("{}: {}\n", i + 1, list.join(" ")));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<TradeSpec, TradeError> {
        let err = |line: usize, msg: &str| TradeError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or_else(|| err(1, "missing header"))?;
        let k: usize = header
            .strip_prefix("trade ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err(hl, "expected `trade <k>`"))?;
        let mut fingerprint = None;
        let mut cells = Vec::with_capacity(k);
        for (ln, line) in lines {
            if let Some(fp) = line.strip_prefix("fingerprint ") {
                if !cells.is_empty() || fingerprint.is_some() {
                    return Err(err(ln, "fingerprint must follow the header"));
                }
                fingerprint = Some(fp.trim().to_string());
                continue;
            }
            let (index, rest) = line.split_once(':').ok_or_else(|| err(ln, "expected `<i>: cells`"))?;
            if index.trim().parse::<usize>().ok() != Some(cells.len() + 1) {
                return Err(err(ln, "square lines must be numbered 1, 2, ..."));
            }
            let rest = rest.trim();
            let mut set = Vec::new();
            if rest != "-" {
                for tok in rest.split_whitespace() {
                    let cell = tok
                        .strip_prefix('(')
                        .and_then(|t| t.strip_suffix(')'))
                        .and_then(|t| t.split_once(','))
                        .and_then(|(r, c)| Some((r.trim().parse::<usize>().ok()?, c.trim().parse::<usize>().ok()?)))
                        .filter(|&(r, c)| r >= 1 && c >= 1)
                        .ok_or_else(|| err(ln, &format!("bad cell `{tok}`")))?;
                    set.push((cell.0 - 1, cell.1 - 1));
                }
            }
            set.sort_unstable();
            set.dedup();
            cells.push(set);
        }
        if cells.len() != k {
            return Err(err(0, &format!("expected {k} square lines, found {}", cells.len())));
        }
        Ok(TradeSpec { cells, fingerprint })
    }
}

fn normalize_cells(n: usize, cells: &[Cell]) -> Result<Vec<Cell>, TradeError> {
    if cells.is_empty() {
        return Err(TradeError::EmptyCellSet);
    }
    let mut c = cells.to_vec();
    c.sort_unstable();
    c.dedup();
    if let Some(&(r, col)) = c.iter().find(|&&(r, col)| r >= n || col >= n) {
        return Err(TradeError::CellOutOfRange(r + 1, col + 1));
    }
    Ok(c)
}

fn cell_mask(n: usize, cells: &[Cell]) -> BitMatrix {
    let mut m = BitMatrix::zeros(n);
    for &(r, c) in cells {
        m.set(r, c, true);
    }
    m
}

fn apply(set: &MofsSet, cells: &[Vec<Cell>]) -> Result<MofsSet, FsqError> {
    let n = set.order();
    let squares = set
        .squares()
        .iter()
        .zip(cells)
        .map(|(sq, c)| sq.xor(&cell_mask(n, c)))
        .collect();
    MofsSet::new(n, squares)
}

/// The per-square cell sets of the basic trade on `cells` that switches
/// square `reference`, checked against the two conditions characterising
/// basic trades but not by switching.
pub fn basic_trade_conditions(
    set: &MofsSet,
    cells: &[Cell],
    reference: usize,
) -> Result<Vec<Vec<Cell>>, TradeError> {
    let n = set.order();
    let c = normalize_cells(n, cells)?;
    if reference >= set.len() {
        return Err(FsqError::SquareIndex(reference + 1).into());
    }
    let m = cell_mask(n, &c);
    let first = set.square(reference);
    for r in 0..n {
        let ones = (first.row(r) & m.row(r)).count_ones();
        if 2 * ones != m.row(r).count_ones() {
            return Err(TradeError::NotATrade(TradeViolation::RowBalance(r)));
        }
    }
    let (ft, mt) = (first.transpose(), m.transpose());
    for col in 0..n {
        let ones = (ft.row(col) & mt.row(col)).count_ones();
        if 2 * ones != mt.row(col).count_ones() {
            return Err(TradeError::NotATrade(TradeViolation::ColumnBalance(col)));
        }
    }
    let out = basic_trade_cells(set, &c, reference);
    for (j, sq) in set.squares().iter().enumerate() {
        if !out[j].is_empty() {
            continue;
        }
        // V(1,1) and V(1,0) must meet V(j,1) equally often
        let (mut a, mut b) = (0, 0);
        for r in 0..n {
            let vj1 = sq.row(r) & m.row(r);
            a += (vj1 & first.row(r)).count_ones();
            b += (vj1 & !first.row(r)).count_ones();
        }
        if a != b {
            return Err(TradeError::NotATrade(TradeViolation::Orthogonality(j)));
        }
    }
    Ok(out)
}

/// `C_j = cells` for every square that agrees with square `reference` on
/// all of `cells` or on none of them, and `C_j` empty otherwise. No
/// condition is checked; cells must be in range.
pub fn basic_trade_cells(set: &MofsSet, cells: &[Cell], reference: usize) -> Vec<Vec<Cell>> {
    let first = set.square(reference);
    set.squares()
        .iter()
        .map(|sq| {
            let differ = cells.iter().filter(|&&(r, c)| sq.get(r, c) != first.get(r, c)).count();
            if differ == 0 || differ == cells.len() {
                cells.to_vec()
            } else {
                Vec::new()
            }
        })
        .collect()
}

/// Whether switching the given per-square cell sets leaves a set of MOFS.
pub fn is_trade(set: &MofsSet, cells: &[Vec<Cell>]) -> bool {
    cells.len() == set.len()
        && cells.iter().any(|c| !c.is_empty())
        && matches!(apply(set, cells), Ok(s) if verify_mofs(&s).is_valid())
}

/// Basic trade on the common cell set `cells`. Each square is tried in turn
/// as the switched reference square; the first that satisfies both
/// conditions, and whose switched set verifies, gives the trade. The error
/// reported is the one for the first square.
pub fn validate_basic_trade(set: &MofsSet, cells: &[Cell]) -> Result<TradeSpec, TradeError> {
    normalize_cells(set.order(), cells)?;
    if set.is_empty() {
        return Err(TradeError::EmptyCellSet);
    }
    let mut first_err = None;
    for reference in 0..set.len() {
        let outcome = basic_trade_conditions(set, cells, reference).and_then(|per_square| {
            let report = verify_mofs(&apply(set, &per_square)?);
            if report.is_valid() {
                Ok(per_square)
            } else {
                Err(TradeError::NotATrade(TradeViolation::Definition(report.to_string())))
            }
        });
        match outcome {
            Ok(per_square) => {
                return Ok(TradeSpec {
                    cells: per_square,
                    fingerprint: Some(fingerprint(set)),
                })
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    Err(first_err.expect("at least one square"))
}

/// Any trade, checked only by switching.
pub fn validate_trade(set: &MofsSet, cells: &[Vec<Cell>]) -> Result<TradeSpec, TradeError> {
    let n = set.order();
    if cells.len() != set.len() {
        return Err(FsqError::DimensionMismatch(format!(
            "trade has {} cell sets for {} squares",
            cells.len(),
            set.len()
        ))
        .into());
    }
    if cells.iter().all(|c| c.is_empty()) {
        return Err(TradeError::EmptyCellSet);
    }
    let cells: Vec<Vec<Cell>> = cells
        .iter()
        .map(|c| if c.is_empty() { Ok(Vec::new()) } else { normalize_cells(n, c) })
        .collect::<Result<_, _>>()?;
    let report = verify_mofs(&apply(set, &cells)?);
    if !report.is_valid() {
        return Err(TradeError::NotATrade(TradeViolation::Definition(report.to_string())));
    }
    Ok(TradeSpec {
        cells,
        fingerprint: Some(fingerprint(set)),
    })
}

/// Switches every cell of the trade. Fails with `StaleTrade` if the trade was
/// validated against another set or does not preserve orthogonality here.
pub fn switch_trade(set: &MofsSet, trade: &TradeSpec) -> Result<MofsSet, TradeError> {
    if trade.k() != set.len() {
        return Err(TradeError::StaleTrade);
    }
    if trade.fingerprint.as_ref().is_some_and(|fp| *fp != fingerprint(set)) {
        return Err(TradeError::StaleTrade);
    }
    let n = set.order();
    if trade.cells.iter().flatten().any(|&(r, c)| r >= n || c >= n) {
        return Err(TradeError::StaleTrade);
    }
    let out = apply(set, &trade.cells)?;
    if !verify_mofs(&out).is_valid() {
        return Err(TradeError::StaleTrade);
    }
    Ok(out)
}

/// The full-board trade and, for every other square, the trades on the
/// cells where it agrees and where it disagrees with the first square.
pub fn trivial_trades(set: &MofsSet) -> Result<Vec<TradeSpec>, TradeError> {
    let n = set.order();
    let k = set.len();
    let all: Vec<Cell> = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).collect();
    let mut specs = Vec::with_capacity(2 * k.saturating_sub(1) + 1);
    let mut full = vec![Vec::new(); k];
    full[0] = all.clone();
    specs.push(full);
    let first = set.square(0);
    for j in 1..k {
        let sq = set.square(j);
        for agree in [true, false] {
            let c: Vec<Cell> =
                all.iter().copied().filter(|&(r, col)| (first.get(r, col) == sq.get(r, col)) == agree).collect();
            let mut cells = vec![Vec::new(); k];
            cells[0] = c.clone();
            cells[j] = c;
            specs.push(cells);
        }
    }
    specs.iter().map(|c| validate_trade(set, c)).collect()
}

fn check_row_pairs(set: &MofsSet) -> Result<(), TradeError> {
    let n = set.order();
    let mask = row_mask(n);
    for (i, sq) in set.squares().iter().enumerate() {
        for a in 0..n {
            for b in a + 1..n {
                let (x, y) = (sq.row(a), sq.row(b));
                if x != y && x != y ^ mask {
                    return Err(TradeError::PreconditionFailed { square: i + 1, rows: (a, b) });
                }
            }
        }
    }
    Ok(())
}

/// Rows equal to row 0 of the first square, the other rows, the columns
/// where row 0 reads 0, and the columns where it reads 1.
fn block_classes(set: &MofsSet) -> [Vec<usize>; 4] {
    let n = set.order();
    let f = set.square(0);
    let r0 = f.row(0);
    let (same, other) = (0..n).partition(|&r| f.row(r) == r0);
    let (zero, one) = (0..n).partition(|&c| (r0 >> c) & 1 == 0);
    [same, other, zero, one]
}

fn quad(r: (usize, usize), c: (usize, usize)) -> Vec<Cell> {
    let mut cells = vec![(r.0, c.0), (r.0, c.1), (r.1, c.0), (r.1, c.1)];
    cells.sort_unstable();
    cells
}

/// Every intercalate of the first square meeting its four constant blocks,
/// as a validated basic trade. Needs every square to have all row pairs
/// equal or complementary.
pub fn intercalate_trades(set: &MofsSet) -> Result<Vec<TradeSpec>, TradeError> {
    if set.is_empty() {
        return Err(TradeError::EmptyCellSet);
    }
    check_row_pairs(set)?;
    let [same, other, zero, one] = block_classes(set);
    let mut out = Vec::with_capacity(same.len() * other.len() * zero.len() * one.len());
    for &a in &same {
        for &b in &other {
            for &c in &zero {
                for &d in &one {
                    out.push(validate_basic_trade(set, &quad((a, b), (c, d)))?);
                }
            }
        }
    }
    Ok(out)
}

/// The `(n/2 - 1)^2` pairwise disjoint intercalate trades `T(r, c)`,
/// `2 <= r, c <= n/2`, where `T(r, c)` pairs the `r`-th row of each row
/// block with the `c`-th column of each column block. When the first square
/// is the block square these are the cells `(r, c)`, `(r + n/2, c)`,
/// `(r, c + n/2)` and `(r + n/2, c + n/2)`.
pub fn disjoint_trade_family(set: &MofsSet) -> Result<Vec<TradeSpec>, TradeError> {
    if set.is_empty() {
        return Err(TradeError::EmptyCellSet);
    }
    if let Some(i) = set.squares().iter().position(|sq| sq.get(0, 0)) {
        return Err(TradeError::NotStandardized(i + 1));
    }
    check_row_pairs(set)?;
    let [same, other, zero, one] = block_classes(set);
    let mut out = Vec::new();
    for r in 1..same.len() {
        for c in 1..zero.len() {
            out.push(validate_basic_trade(set, &quad((same[r], other[r]), (zero[c], one[c])))?);
        }
    }
    Ok(out)
}

/// Switches the members of the disjoint family selected by `mask` (bit `i`
/// selects member `i`) and checks the result.
pub fn generate_variants(set: &MofsSet, mask: u64) -> Result<MofsSet, TradeError> {
    let family = disjoint_trade_family(set)?;
    if family.len() < 64 && mask >> family.len() != 0 {
        return Err(FsqError::DimensionMismatch(format!(
            "mask selects beyond the {} trades of the family",
            family.len()
        ))
        .into());
    }
    let mut cells = vec![Vec::new(); set.len()];
    for (i, t) in family.iter().enumerate() {
        if (mask >> i) & 1 == 1 {
            for (dst, src) in cells.iter_mut().zip(&t.cells) {
                dst.extend_from_slice(src);
            }
        }
    }
    let out = apply(set, &cells)?;
    let report = verify_mofs(&out);
    if !report.is_valid() {
        return Err(TradeError::NotATrade(TradeViolation::Definition(report.to_string())));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{complete_from_hadamard, hadamard};
    use crate::data;
    use crate::fsq::are_isomorphic;

    fn federer(n: usize) -> MofsSet {
        complete_from_hadamard(&hadamard(n).unwrap()).unwrap()
    }

    #[test]
    fn display_twelve_trades() {
        let s = data::load("display-12").unwrap();
        let left = validate_basic_trade(&s, &[(2, 2), (2, 3), (3, 2), (3, 3)]).unwrap();
        assert_eq!(left.changed_squares(), vec![5, 6, 7, 8]);
        let right = validate_basic_trade(&s, &[(1, 2), (1, 3), (3, 2), (3, 3)]).unwrap();
        assert_eq!(right.changed_squares(), vec![3, 4, 5, 6]);
        let a = switch_trade(&s, &left).unwrap();
        let b = switch_trade(&s, &right).unwrap();
        assert!(!are_isomorphic(&a, &s).unwrap());
        assert!(!are_isomorphic(&b, &s).unwrap());
        assert!(!are_isomorphic(&a, &b).unwrap());
        let back = TradeSpec { fingerprint: Some(fingerprint(&a)), ..left.clone() };
        assert_eq!(switch_trade(&a, &back).unwrap(), s);
        assert!(matches!(switch_trade(&a, &left), Err(TradeError::StaleTrade)));
    }

    #[test]
    fn single_cell_and_full_board() {
        let s = data::load("display-10").unwrap();
        let e = validate_basic_trade(&s, &[(0, 0)]).unwrap_err();
        assert!(matches!(&e, TradeError::NotATrade(v) if v.condition() == 1));
        assert!(matches!(validate_basic_trade(&s, &[]), Err(TradeError::EmptyCellSet)));
        let all: Vec<Cell> = (0..6).flat_map(|r| (0..6).map(move |c| (r, c))).collect();
        let t = validate_basic_trade(&s, &all).unwrap();
        assert_eq!(t.changed_squares(), vec![0]);
        let out = switch_trade(&s, &t).unwrap();
        assert_eq!(out.square(0), &s.square(0).complement());
    }

    #[test]
    fn trivial_trades_keep_the_class() {
        let s = data::load("display-10").unwrap();
        let ts = trivial_trades(&s).unwrap();
        assert_eq!(ts.len(), 9);
        for t in &ts {
            assert!(t.is_basic());
            assert!(are_isomorphic(&switch_trade(&s, t).unwrap(), &s).unwrap());
        }
        let pair = federer(4).subset(&[0, 1]).unwrap();
        let swap = &trivial_trades(&pair).unwrap()[2];
        let out = switch_trade(&pair, swap).unwrap();
        assert_eq!(out.square(0), pair.square(1));
        assert_eq!(out.square(1), pair.square(0));
    }

    #[test]
    fn intercalates_in_hadamard_sets() {
        let s = federer(4);
        let ts = intercalate_trades(&s).unwrap();
        assert_eq!(ts.len(), 16);
        for t in &ts {
            let out = switch_trade(&s, t).unwrap();
            assert!(check_row_pairs(&out).is_err());
            assert!(!are_isomorphic(&out, &s).unwrap());
        }
        assert!(matches!(
            intercalate_trades(&data::load("display-10").unwrap()),
            Err(TradeError::PreconditionFailed { .. })
        ));
    }

    #[test]
    fn disjoint_family_at_four() {
        let s = federer(4);
        let fam = disjoint_trade_family(&s).unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(generate_variants(&s, 0).unwrap(), s);
        let v = generate_variants(&s, 1).unwrap();
        assert_ne!(v, s);
        assert!(v.is_standardized());
        let bad = MofsSet::new(4, vec![s.square(0).complement()]).unwrap();
        assert!(matches!(disjoint_trade_family(&bad), Err(TradeError::NotStandardized(1))));
    }

    #[test]
    fn thirteen_set_trade_has_twelve_cells() {
        let s = data::load("display-17").unwrap();
        let cells = [(0, 0), (0, 2), (0, 3), (0, 4), (1, 3), (1, 5), (2, 4), (2, 5), (4, 0), (4, 1), (5, 1), (5, 2)];
        let t = validate_basic_trade(&s, &cells).unwrap();
        assert_eq!(t.changed_squares(), vec![0]);
        let out = switch_trade(&s, &t).unwrap();
        assert!(verify_mofs(&out).is_valid());
        assert_eq!(crate::relations::find_relation(&out, false).unwrap(), None);
        assert!(crate::search::mates(&out).unwrap().is_empty());
    }

    #[test]
    fn text_round_trip() {
        let s = data::load("display-12").unwrap();
        let t = validate_basic_trade(&s, &[(2, 2), (2, 3), (3, 2), (3, 3)]).unwrap();
        let text = t.to_text();
        assert!(text.starts_with("trade 9\n"));
        assert!(text.contains("\n1: -\n"));
        assert!(text.contains("\n6: (3,3) (3,4) (4,3) (4,4)\n"));
        assert_eq!(TradeSpec::parse(&text).unwrap(), t);
        assert!(TradeSpec::parse("trade 2\n1: (0,1)\n2: -\n").is_err());
        assert!(TradeSpec::parse("trade 2\n1: -\n").is_err());
    }
}
