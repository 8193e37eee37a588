//! Maximal sets of five MOFS of every order `4κ + 2`, grown from the order 6
//! example with a `(5, 3)`-relation.
//!
//! Rows `0..2κ+3` and columns `0..2κ+1` form the zero block of the Z2-sum.
//! The base set sits on rows `0..5` plus row `2κ+3` and on columns `0..3`
//! plus `2κ+1..2κ+4`. The remaining cells of rows `0..4` take copies of a
//! fixed 4x4 array (and the arrays `B`, `B̄` when `κ ≡ 0, 3 mod 4`); all
//! other cells are covered by intercalates `I(r)` with one row and one
//! column on each side of the block split.

use super::ConstructionError;
use crate::data;
use crate::fsq::{verify_mofs, BitMatrix, MofsSet};

const TUPLE_BITS: usize = 5;
const FULL: u8 = 0b11111;

const ARRAY_A: [[&str; 4]; 4] = [
    ["00011", "00011", "11100", "11100"],
    ["01100", "01100", "10011", "10011"],
    ["10001", "10001", "01110", "01110"],
    ["11110", "11110", "00001", "00001"],
];

const ARRAY_B: [[&str; 4]; 4] = [
    ["11100", "11010", "11111", "11001"],
    ["10011", "10101", "10000", "10110"],
    ["01110", "01011", "00111", "01101"],
    ["00001", "00100", "01000", "00010"],
];

/// Reads a tuple written first square first; square `i` goes to bit `i`.
fn tuple(s: &str) -> u8 {
    s.bytes()
        .enumerate()
        .fold(0, |acc, (i, b)| acc | (((b == b'1') as u8) << i))
}

/// The written form of a tuple, used for lexicographic ordering.
fn written(t: u8) -> String {
    (0..TUPLE_BITS)
        .map(|i| if (t >> i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Even-weight representatives of the complementary pairs, sorted by their
/// written form, optionally skipping pairs that occur in `ARRAY_A`.
fn even_representatives(skip_array_a: bool) -> Vec<u8> {
    let used: Vec<u8> = ARRAY_A.iter().flatten().map(|s| tuple(s)).collect();
    let mut reps: Vec<u8> = (0..32u8)
        .filter(|t| t.count_ones() % 2 == 0)
        .filter(|t| !skip_array_a || !(used.contains(t) || used.contains(&(t ^ FULL))))
        .collect();
    reps.sort_by_key(|&t| written(t));
    reps
}

struct Grid {
    n: usize,
    cells: Vec<Option<u8>>,
}

impl Grid {
    fn put(&mut self, r: usize, c: usize, t: u8) {
        let slot = &mut self.cells[r * self.n + c];
        debug_assert!(slot.is_none(), "cell ({r},{c}) filled twice");
        *slot = Some(t);
    }

    fn intercalate(&mut self, (x, xp, y, yp): (usize, usize, usize, usize), r: u8) {
        self.put(x, y, r);
        self.put(x, yp, r ^ FULL);
        self.put(xp, y, r ^ FULL);
        self.put(xp, yp, r);
    }

    fn into_set(self) -> Result<MofsSet, ConstructionError> {
        let n = self.n;
        let squares = (0..TUPLE_BITS)
            .map(|i| {
                BitMatrix::from_fn(n, |r, c| {
                    let t = self.cells[r * n + c].expect("every cell is filled");
                    (t >> i) & 1 == 1
                })
            })
            .collect();
        Ok(MofsSet::new(n, squares)?)
    }
}

/// A 5-MOFS(n) with a full `(n/2 + 2, n/2)`-relation, hence maximal.
pub fn five_max(n: usize) -> Result<MofsSet, ConstructionError> {
    if n < 6 || n % 4 != 2 {
        return Err(ConstructionError::BadOrder(n, "five_max needs n = 2 mod 4, n >= 6"));
    }
    let base = data::load("display-10.fsq")
        .map_err(|e| ConstructionError::MissingData(e.to_string()))?;
    if n == 6 {
        return Ok(base);
    }
    let kappa = (n - 2) / 4;
    let mut grid = Grid {
        n,
        cells: vec![None; n * n],
    };
    let base_rows = [0, 1, 2, 3, 4, 2 * kappa + 3];
    let base_cols = [0, 1, 2, 2 * kappa + 1, 2 * kappa + 2, 2 * kappa + 3];
    for (i, &r) in base_rows.iter().enumerate() {
        for (j, &c) in base_cols.iter().enumerate() {
            grid.put(r, c, base.tuple(i, j) as u8);
        }
    }

    // rows 0..4: X2 columns 3..2κ+1 and X2' columns 2κ+4..n
    let left = 3;
    let right = 2 * kappa + 4;
    let mut copies_of_a = kappa - 1;
    let mut offset = 0;
    if kappa % 4 == 3 || kappa % 4 == 0 {
        for (r, row) in ARRAY_B.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                grid.put(r, left + j, tuple(s) ^ FULL);
                grid.put(r, right + j, tuple(s));
            }
        }
        copies_of_a = kappa - 3;
        offset = 4;
    }
    for copy in 0..copies_of_a {
        for (r, row) in ARRAY_A.iter().enumerate() {
            for (j, s) in row.iter().enumerate() {
                let t = tuple(s);
                let col = if j < 2 {
                    left + offset + 2 * copy + j
                } else {
                    right + offset + 2 * copy + j - 2
                };
                grid.put(r, col, t);
            }
        }
    }

    let mut slots = Vec::with_capacity(4 * (kappa * kappa - 1));
    for j in 0..2 * kappa - 2 {
        slots.push((4, 2 * kappa + 3, 3 + j, 2 * kappa + 4 + j));
    }
    for i in 0..2 * kappa - 2 {
        for j in 0..2 * kappa + 1 {
            slots.push((5 + i, 2 * kappa + 4 + i, j, 2 * kappa + 1 + j));
        }
    }
    let mut fill = Vec::with_capacity(slots.len());
    for r in even_representatives(true) {
        fill.extend(std::iter::repeat(r).take(copies_of_a));
    }
    let rest = slots.len() - fill.len();
    if rest % 16 != 0 {
        return Err(ConstructionError::SelfCheckFailed(format!(
            "{rest} intercalates left for order {n}"
        )));
    }
    let all = even_representatives(false);
    for _ in 0..rest / 16 {
        fill.extend(&all);
    }
    for (slot, r) in slots.into_iter().zip(fill) {
        grid.intercalate(slot, r);
    }

    let set = grid.into_set()?;
    let report = verify_mofs(&set);
    if !report.is_valid() {
        return Err(ConstructionError::SelfCheckFailed(report.to_string()));
    }
    Ok(set)
}
