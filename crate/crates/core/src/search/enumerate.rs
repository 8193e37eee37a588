use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::SearchError;
use crate::fsq::{canonical_form, row_mask, BitMatrix, FrequencySquare, MofsSet, Row};

/// Largest order accepted by [`for_each_square`] and [`count_squares`].
pub const RAW_ORDER_LIMIT: usize = 8;
/// Largest order for which [`enumerate_squares`] returns every square.
pub const RAW_LIST_LIMIT: usize = 6;
/// Largest order for which [`enumerate_squares`] returns class
/// representatives.
pub const CLASS_ORDER_LIMIT: usize = 6;

/// All `n`-bit rows with `n/2` ones, ascending.
pub fn balanced_rows(n: usize) -> Vec<Row> {
    fn go(n: usize, start: usize, left: usize, acc: Row, out: &mut Vec<Row>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for b in start..=n - left {
            go(n, b + 1, left - 1, acc | 1 << b, out);
        }
    }
    let mut out = Vec::new();
    if n % 2 == 0 {
        go(n, 0, n / 2, 0, &mut out);
    }
    out.sort_unstable();
    out
}

fn check_order(n: usize, bound: usize) -> Result<(), SearchError> {
    if n > bound {
        return Err(SearchError::OrderTooLarge { order: n, bound });
    }
    if n == 0 || n % 2 != 0 {
        return Err(SearchError::UnsupportedOrder(n));
    }
    Ok(())
}

struct RowWalk<'a, F: FnMut(&[Row]) -> bool> {
    n: usize,
    rows: &'a [Row],
    sorted: bool,
    col: Vec<usize>,
    chosen: Vec<Row>,
    visit: F,
}

impl<F: FnMut(&[Row]) -> bool> RowWalk<'_, F> {
    fn go(&mut self, from: usize) -> bool {
        let n = self.n;
        let depth = self.chosen.len();
        if depth == n {
            return (self.visit)(&self.chosen);
        }
        let left = n - depth;
        let half = n / 2;
        // columns that must take a one in every remaining row, or can take none
        let mut must: Row = 0;
        let mut full: Row = 0;
        for c in 0..n {
            if self.col[c] + left == half {
                must |= 1 << c;
            }
            if self.col[c] == half {
                full |= 1 << c;
            }
        }
        if left == 1 {
            let last = !full & row_mask(n);
            if self.sorted && self.chosen.last().is_some_and(|&p| last < p) {
                return true;
            }
            self.chosen.push(last);
            let go_on = (self.visit)(&self.chosen);
            self.chosen.pop();
            return go_on;
        }
        let start = if self.sorted { from } else { 0 };
        for idx in start..self.rows.len() {
            let r = self.rows[idx];
            if r & must != must || r & full != 0 {
                continue;
            }
            for c in 0..n {
                if (r >> c) & 1 == 1 {
                    self.col[c] += 1;
                }
            }
            self.chosen.push(r);
            let go_on = self.go(idx);
            self.chosen.pop();
            for c in 0..n {
                if (r >> c) & 1 == 1 {
                    self.col[c] -= 1;
                }
            }
            if !go_on {
                return false;
            }
        }
        true
    }
}

/// Calls `visit` with the rows of every balanced square of order `n`, in
/// lexicographic order of the row sequence, until it returns `false`.
pub fn for_each_square(n: usize, visit: impl FnMut(&[Row]) -> bool) -> Result<(), SearchError> {
    check_order(n, RAW_ORDER_LIMIT)?;
    let rows = balanced_rows(n);
    RowWalk {
        n,
        rows: &rows,
        sorted: false,
        col: vec![0; n],
        chosen: Vec::with_capacity(n),
        visit,
    }
    .go(0);
    Ok(())
}

/// Squares whose rows are in non-decreasing order; every row-permutation
/// class has exactly one such member.
fn for_each_row_sorted(n: usize, visit: impl FnMut(&[Row]) -> bool) {
    let rows = balanced_rows(n);
    RowWalk {
        n,
        rows: &rows,
        sorted: true,
        col: vec![0; n],
        chosen: Vec::with_capacity(n),
        visit,
    }
    .go(0);
}

/// Number of balanced squares of order `n`, by dynamic programming over
/// how many columns hold each partial count of ones.
pub fn count_squares(n: usize) -> Result<u128, SearchError> {
    check_order(n, RAW_ORDER_LIMIT)?;
    let half = n / 2;
    let binom = |a: usize, b: usize| -> u128 {
        if b > a {
            return 0;
        }
        (0..b).fold(1u128, |acc, i| acc * (a - i) as u128 / (i + 1) as u128)
    };
    fn distribute(
        groups: &[usize],
        j: usize,
        left: usize,
        take: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if j == groups.len() {
            if left == 0 {
                out.push(take.clone());
            }
            return;
        }
        for x in 0..=groups[j].min(left) {
            take.push(x);
            distribute(groups, j + 1, left - x, take, out);
            take.pop();
        }
    }
    fn count(
        state: Vec<usize>,
        rows_left: usize,
        half: usize,
        memo: &mut HashMap<(Vec<usize>, usize), u128>,
        binom: &dyn Fn(usize, usize) -> u128,
    ) -> u128 {
        if rows_left == 0 {
            return (state.iter().take(half).all(|&c| c == 0)) as u128;
        }
        // a column with j ones needs half - j more
        if state
            .iter()
            .enumerate()
            .any(|(j, &c)| c > 0 && half - j > rows_left)
        {
            return 0;
        }
        if let Some(&v) = memo.get(&(state.clone(), rows_left)) {
            return v;
        }
        let mut ways = Vec::new();
        distribute(&state[..half], 0, half, &mut Vec::new(), &mut ways);
        let mut total = 0;
        for take in ways {
            let mult: u128 = take
                .iter()
                .enumerate()
                .map(|(j, &x)| binom(state[j], x))
                .product();
            let mut next = state.clone();
            for (j, &x) in take.iter().enumerate() {
                next[j] -= x;
                next[j + 1] += x;
            }
            total += mult * count(next, rows_left - 1, half, memo, binom);
        }
        memo.insert((state, rows_left), total);
        total
    }
    let mut state = vec![0; half + 1];
    state[0] = n;
    Ok(count(state, n, half, &mut HashMap::new(), &binom))
}

/// Whether the square is isomorphic to the bachelor square, i.e. all its
/// rows equal the first row or its complement.
pub fn is_bachelor_class(sq: &BitMatrix) -> bool {
    let n = sq.order();
    let first = sq.row(0);
    let comp = !first & row_mask(n);
    sq.rows().iter().all(|&r| r == first || r == comp)
}

/// Every balanced square of order `n` (`n <= 6`), or one representative per
/// isomorphism class, sorted.
pub fn enumerate_squares(n: usize, classes: bool) -> Result<Vec<FrequencySquare>, SearchError> {
    if classes {
        check_order(n, CLASS_ORDER_LIMIT)?;
        let mut candidates = Vec::new();
        for_each_row_sorted(n, |rows| {
            candidates.push(BitMatrix::from_rows(n, rows.to_vec()));
            true
        });
        let forms: Vec<_> = candidates
            .par_iter()
            .map(|m| {
                let set = MofsSet::new(n, vec![m.clone()]).expect("balanced square");
                canonical_form(&set).expect("order within bound")
            })
            .collect();
        let mut reps: BTreeMap<_, BitMatrix> = BTreeMap::new();
        for (form, m) in forms.into_iter().zip(candidates) {
            reps.entry(form)
                .and_modify(|cur| {
                    if m < *cur {
                        *cur = m.clone();
                    }
                })
                .or_insert(m);
        }
        let mut out: Vec<BitMatrix> = reps.into_values().collect();
        out.sort();
        return Ok(out
            .into_iter()
            .map(|m| FrequencySquare::new(m).expect("balanced square"))
            .collect());
    }
    check_order(n, RAW_LIST_LIMIT)?;
    let mut out = Vec::new();
    for_each_square(n, |rows| {
        out.push(FrequencySquare::new(BitMatrix::from_rows(n, rows.to_vec())).expect("balanced"));
        true
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// All `C(n, n/2)^n` row choices filtered by column sums.
    fn brute_count(n: usize) -> u64 {
        let rows = balanced_rows(n);
        let mut count = 0;
        let total = rows.len().pow(n as u32);
        for mut code in 0..total {
            let mut cols = vec![0; n];
            for _ in 0..n {
                let r = rows[code % rows.len()];
                code /= rows.len();
                for (c, v) in cols.iter_mut().enumerate() {
                    *v += (r >> c) as usize & 1;
                }
            }
            if cols.iter().all(|&v| v == n / 2) {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn counts_agree() {
        assert_eq!(brute_count(4), 90);
        assert_eq!(count_squares(2).unwrap(), 2);
        assert_eq!(count_squares(4).unwrap(), 90);
        assert_eq!(count_squares(6).unwrap(), 297_200);
        assert_eq!(count_squares(8).unwrap(), 116_963_796_250);
        for n in [2, 4, 6] {
            assert_eq!(enumerate_squares(n, false).unwrap().len() as u128, count_squares(n).unwrap());
        }
    }

    #[test]
    fn order_two_by_hand() {
        let all = enumerate_squares(2, false).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].to_bits(), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(all[1].to_bits(), vec![vec![0, 1], vec![1, 0]]);
    }

    #[test]
    fn class_counts() {
        assert_eq!(enumerate_squares(2, true).unwrap().len(), 1);
        assert_eq!(enumerate_squares(4, true).unwrap().len(), 2);
        assert_eq!(enumerate_squares(6, true).unwrap().len(), 6);
        assert!(matches!(
            enumerate_squares(8, true),
            Err(SearchError::OrderTooLarge { .. })
        ));
    }

    #[test]
    fn bachelor_class_detection() {
        let a = crate::constructions::bachelor_square(6).unwrap();
        assert!(is_bachelor_class(&a));
        let classes = enumerate_squares(6, true).unwrap();
        assert_eq!(classes.iter().filter(|s| is_bachelor_class(s)).count(), 1);
    }
}
