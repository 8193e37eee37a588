//! Incomplete MOFS with a single square hole in the top-left corner:
//! validation, the 2-square family, the corner structure check, exhaustive and random
//! fillings, orthogonal-array fillings and plugging the hole.

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::constructions::OrthogonalArray2;
use crate::fsq::{content_lines, BitMatrix, FsqError, MofsSet, MAX_ORDER};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EmbeddingError {
    #[error("order {0} is not supported here")]
    BadOrder(usize),
    #[error("wrong shape: {0}")]
    WrongShape(String),
    #[error("order {order} exceeds the exhaustive search bound {bound}")]
    OrderTooLarge { order: usize, bound: usize },
    #[error("4*lambda = {four_lambda} does not divide b(n-b) = {cells}")]
    DivisibilityFailed { four_lambda: usize, cells: usize },
    #[error("tiling failed: {0}")]
    TilingFailed(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("not a valid IMOFS: {0}")]
    Invalid(String),
    #[error("imofs parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Fsq(#[from] FsqError),
}

/// `k` incomplete squares of order `n` sharing an empty `s x s` hole in
/// the top-left corner. Hole cells are stored as 0 and never read.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Imofs {
    n: usize,
    s: usize,
    squares: Vec<BitMatrix>,
}

impl Imofs {
    pub fn new(n: usize, s: usize, squares: Vec<BitMatrix>) -> Result<Self, EmbeddingError> {
        if n == 0 || n > MAX_ORDER || n % 2 != 0 || s % 2 != 0 || s >= n {
            return Err(EmbeddingError::WrongShape(format!("n={n}, s={s}")));
        }
        if squares.iter().any(|q| q.order() != n) {
            return Err(EmbeddingError::WrongShape("square order differs".into()));
        }
        let mut squares = squares;
        for q in &mut squares {
            for r in 0..s {
                for c in 0..s {
                    q.set(r, c, false);
                }
            }
        }
        Ok(Imofs { n, s, squares })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn hole(&self) -> usize {
        self.s
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }

    pub fn squares(&self) -> &[BitMatrix] {
        &self.squares
    }

    #[inline]
    pub fn is_hole(&self, r: usize, c: usize) -> bool {
        r < self.s && c < self.s
    }

    /// Tuple at a filled cell, square `i` in bit `i`.
    pub fn tuple(&self, r: usize, c: usize) -> Option<u128> {
        (!self.is_hole(r, c)).then(|| {
            self.squares
                .iter()
                .enumerate()
                .fold(0, |acc, (i, q)| acc | ((q.get(r, c) as u128) << i))
        })
    }

    /// The first `k` squares.
    pub fn restricted(&self, k: usize) -> Imofs {
        Imofs {
            n: self.n,
            s: self.s,
            squares: self.squares[..k.min(self.len())].to_vec(),
        }
    }

    /// Lists every balance and orthogonality failure over filled cells.
    pub fn violations(&self) -> Vec<String> {
        let (n, s) = (self.n, self.s);
        let mut out = Vec::new();
        let filled_row = |r: usize| (0..n).filter(move |&c| !(r < s && c < s));
        for (i, q) in self.squares.iter().enumerate() {
            for r in 0..n {
                let cells: Vec<usize> = filled_row(r).collect();
                let ones = cells.iter().filter(|&&c| q.get(r, c)).count();
                if 2 * ones != cells.len() {
                    out.push(format!("square {}: row {} unbalanced", i + 1, r + 1));
                }
                let ones = cells.iter().filter(|&&c| q.get(c, r)).count();
                if 2 * ones != cells.len() {
                    out.push(format!("square {}: column {} unbalanced", i + 1, r + 1));
                }
            }
        }
        let filled = n * n - s * s;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let mut counts = [0usize; 4];
                for r in 0..n {
                    for c in filled_row(r) {
                        let a = self.squares[i].get(r, c) as usize;
                        let b = self.squares[j].get(r, c) as usize;
                        counts[2 * a + b] += 1;
                    }
                }
                if counts.iter().any(|&x| 4 * x != filled) {
                    out.push(format!(
                        "squares {} and {} not orthogonal: {counts:?}",
                        i + 1,
                        j + 1
                    ));
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.violations().is_empty()
    }

    pub fn validate(&self) -> Result<(), EmbeddingError> {
        match self.violations().first() {
            None => Ok(()),
            Some(v) => Err(EmbeddingError::Invalid(v.clone())),
        }
    }

    pub fn to_text(&self) -> String {
        let k = self.len();
        let mut out = format!("imofs {} {} {}\n", self.n, self.s, k);
        for r in 0..self.n {
            let cells: Vec<String> = (0..self.n)
                .map(|c| match self.tuple(r, c) {
                    None => ".".repeat(k),
                    Some(t) => (0..k)
                        .map(|i| if (t >> i) & 1 == 1 { '1' } else { '0' })
                        .collect(),
                })
                .collect();
            writeln!(out, "{}", cells.join(" ")).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Imofs, EmbeddingError> {
        let bad = |m: String| EmbeddingError::Parse(m);
        let mut lines = content_lines(text);
        let (_, header) = lines.next().ok_or_else(|| bad("empty input".into()))?;
        let f: Vec<&str> = header.split_whitespace().collect();
        if f.len() != 4 || f[0] != "imofs" {
            return Err(bad("header must be `imofs <n> <s> <k>`".into()));
        }
        let num = |x: &str| x.parse::<usize>().map_err(|_| bad(format!("bad number `{x}`")));
        let (n, s, k) = (num(f[1])?, num(f[2])?, num(f[3])?);
        if n == 0 || n > MAX_ORDER || s >= n {
            return Err(bad(format!("bad shape n={n}, s={s}")));
        }
        let mut squares = vec![BitMatrix::zeros(n); k];
        for r in 0..n {
            let (lno, line) = lines.next().ok_or_else(|| bad("too few rows".into()))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != n {
                return Err(bad(format!("line {lno}: expected {n} cells")));
            }
            for (c, tok) in toks.iter().enumerate() {
                let hole = r < s && c < s;
                if tok.len() != k {
                    return Err(bad(format!("line {lno}: `{tok}` is not {k} symbols")));
                }
                for (i, ch) in tok.chars().enumerate() {
                    match (ch, hole) {
                        ('.', true) | ('0', false) => {}
                        ('1', false) => squares[i].set(r, c, true),
                        _ => return Err(bad(format!("line {lno}: unexpected `{tok}`"))),
                    }
                }
            }
        }
        if lines.next().is_some() {
            return Err(bad("trailing content".into()));
        }
        Imofs::new(n, s, squares)
    }
}

/// `[[r, r̄], [r̄, r]]` for a `k`-bit tuple.
pub fn i_block(r: u128, k: usize) -> [[u128; 2]; 2] {
    let mask = if k >= 128 { u128::MAX } else { (1 << k) - 1 };
    let rb = !r & mask;
    [[r & mask, rb], [rb, r & mask]]
}

fn place(squares: &mut [BitMatrix], r: usize, c: usize, t: u128) {
    for (i, q) in squares.iter_mut().enumerate() {
        q.set(r, c, (t >> i) & 1 == 1);
    }
}

fn place_block(squares: &mut [BitMatrix], r: usize, c: usize, t: u128, k: usize) {
    let b = i_block(t, k);
    for (i, row) in b.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            place(squares, r + i, c + j, v);
        }
    }
}

/// Two incomplete squares of order `n` with a hole of size `n - 2`.
pub fn two_imofs(n: usize) -> Result<Imofs, EmbeddingError> {
    if n < 4 || n % 2 != 0 || n > MAX_ORDER {
        return Err(EmbeddingError::BadOrder(n));
    }
    // corner array written first square first
    const CORNER: [[Option<&str>; 4]; 4] = [
        [None, None, Some("01"), Some("10")],
        [None, None, Some("11"), Some("00")],
        [Some("10"), Some("11"), Some("00"), Some("01")],
        [Some("01"), Some("00"), Some("10"), Some("11")],
    ];
    let t = |s: &str| -> u128 {
        s.bytes()
            .enumerate()
            .fold(0, |a, (i, b)| a | (((b == b'1') as u128) << i))
    };
    let mut squares = vec![BitMatrix::zeros(n); 2];
    let off = n - 4;
    for (r, row) in CORNER.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            if let Some(s) = cell {
                place(&mut squares, off + r, off + c, t(s));
            }
        }
    }
    for c in (0..off).step_by(2) {
        place_block(&mut squares, n - 2, c, t("00"), 2);
    }
    for r in (0..off).step_by(2) {
        place_block(&mut squares, r, n - 2, t("01"), 2);
    }
    let p = Imofs::new(n, n - 2, squares)?;
    p.validate()?;
    Ok(p)
}

/// Whether the bottom-right 2x2 corner of a 2-IMOFS(n; n-2) holds each
/// pair once with complementary pairs only on the diagonals.
pub fn corner_structure_check(p: &Imofs) -> Result<bool, EmbeddingError> {
    let n = p.order();
    if p.len() != 2 || p.hole() + 2 != n {
        return Err(EmbeddingError::WrongShape(format!(
            "expected 2 squares with hole {}, got {} squares with hole {}",
            n.saturating_sub(2),
            p.len(),
            p.hole()
        )));
    }
    let at = |r: usize, c: usize| p.tuple(n - 2 + r, n - 2 + c).unwrap();
    let m = [[at(0, 0), at(0, 1)], [at(1, 0), at(1, 1)]];
    let mut seen = [false; 4];
    for row in &m {
        for &v in row {
            seen[v as usize] = true;
        }
    }
    Ok(seen.iter().all(|&x| x) && m[0][0] ^ m[1][1] == 3 && m[0][1] ^ m[1][0] == 3)
}

/// Fills the non-hole cells of an `n x n` array with hole `n - 2b`, using
/// `α = b(n-b)/(4λ)` copies of `I(r)` for every row `r` of the array.
pub fn fill_imofs(n: usize, b: usize, oa: &OrthogonalArray2) -> Result<Imofs, EmbeddingError> {
    if n % 2 != 0 || n > MAX_ORDER || 2 * b > n || b == 0 {
        return Err(EmbeddingError::BadOrder(n));
    }
    let s = n - 2 * b;
    if s == 0 || s % 2 != 0 {
        return Err(EmbeddingError::WrongShape(format!("hole {s} must be positive and even")));
    }
    let cells = b * (n - b);
    let four_lambda = 4 * oa.lambda;
    if oa.rows.len() != four_lambda || four_lambda == 0 || cells % four_lambda != 0 {
        return Err(EmbeddingError::DivisibilityFailed { four_lambda, cells });
    }
    let alpha = cells / four_lambda;
    let k = oa.columns;
    let blocks: Vec<(usize, usize)> = (0..n / 2)
        .flat_map(|i| (0..n / 2).map(move |j| (2 * i, 2 * j)))
        .filter(|&(r, c)| !(r < s && c < s))
        .collect();
    if blocks.len() != alpha * oa.rows.len() {
        return Err(EmbeddingError::TilingFailed(format!(
            "{} blocks for {} placements",
            blocks.len(),
            alpha * oa.rows.len()
        )));
    }
    let mut squares = vec![BitMatrix::zeros(n); k];
    let sequence = (0..alpha).flat_map(|_| oa.rows.iter().copied());
    for (&(r, c), t) in blocks.iter().zip(sequence) {
        place_block(&mut squares, r, c, t, k);
    }
    let p = Imofs::new(n, s, squares)?;
    p.validate()?;
    Ok(p)
}

/// Fills the hole of `p` with the set `s`.
pub fn plug(p: &Imofs, s: &MofsSet) -> Result<MofsSet, EmbeddingError> {
    if s.order() != p.hole() || s.len() != p.len() {
        return Err(EmbeddingError::ShapeMismatch(format!(
            "hole {} with {} squares cannot take {} squares of order {}",
            p.hole(),
            p.len(),
            s.len(),
            s.order()
        )));
    }
    let h = p.hole();
    let squares = p
        .squares
        .iter()
        .zip(s.squares())
        .map(|(q, f)| {
            let mut out = q.clone();
            for r in 0..h {
                for c in 0..h {
                    out.set(r, c, f.get(r, c));
                }
            }
            out
        })
        .collect();
    let out = MofsSet::new(p.order(), squares)?;
    let report = crate::fsq::verify_mofs(&out);
    if !report.is_valid() {
        return Err(EmbeddingError::Invalid(report.to_string()));
    }
    Ok(out)
}

/// Backtracking over all fillings of the non-hole cells with `k`-bit tuples
/// under the balance and orthogonality constraints.
pub struct ImofsSearch {
    n: usize,
    s: usize,
    k: usize,
    cells: Vec<(usize, usize)>,
    half_row: Vec<usize>,
    half_col: Vec<usize>,
    quota: usize,
    symmetry: bool,
    rng: Option<ChaCha8Rng>,
}

struct SearchState {
    values: Vec<Option<u8>>,
    row_ones: Vec<Vec<usize>>,
    row_fill: Vec<usize>,
    col_ones: Vec<Vec<usize>>,
    col_fill: Vec<usize>,
    pairs: Vec<[usize; 4]>,
}

/// Largest order accepted by exhaustive searches.
pub const EXHAUSTIVE_ORDER_LIMIT: usize = 6;

impl ImofsSearch {
    pub fn new(n: usize, s: usize, k: usize) -> Result<Self, EmbeddingError> {
        if n % 2 != 0 || s % 2 != 0 || s >= n || k == 0 || k > 8 || n > MAX_ORDER {
            return Err(EmbeddingError::WrongShape(format!("n={n}, s={s}, k={k}")));
        }
        // rows s.. first, then the cells of the hole rows
        let mut cells: Vec<(usize, usize)> = (s..n).flat_map(|r| (0..n).map(move |c| (r, c))).collect();
        let mut lower: Vec<(usize, usize)> = Vec::new();
        for r in 0..s {
            for c in s..n {
                lower.push((r, c));
            }
        }
        // corner cells first so the complement normalization applies to them
        cells.sort_by_key(|&(r, c)| (c < s, r, c));
        cells.extend(lower);
        let filled = |i: usize| if i < s { n - s } else { n };
        Ok(ImofsSearch {
            n,
            s,
            k,
            cells,
            half_row: (0..n).map(|r| filled(r) / 2).collect(),
            half_col: (0..n).map(|c| filled(c) / 2).collect(),
            quota: (n * n - s * s) / 4,
            symmetry: false,
            rng: None,
        })
    }

    /// Only searches fillings whose first cell is all zeros and whose hole
    /// rows and hole columns appear in sorted order (valid when the hole
    /// has size `n - 2`, where those rows and columns are interchangeable).
    pub fn with_symmetry_breaking(mut self) -> Self {
        self.symmetry = true;
        self
    }

    /// Tries values in a random order drawn from `seed`.
    pub fn randomized(mut self, seed: u64) -> Self {
        self.rng = Some(ChaCha8Rng::seed_from_u64(seed));
        self
    }

    fn fits(&self, st: &SearchState, r: usize, c: usize, v: u8) -> bool {
        for i in 0..self.k {
            let bit = ((v >> i) & 1) as usize;
            let ro = st.row_ones[r][i] + bit;
            let rz = st.row_fill[r] + 1 - ro;
            if ro > self.half_row[r] || rz > self.half_row[r] {
                return false;
            }
            let co = st.col_ones[c][i] + bit;
            let cz = st.col_fill[c] + 1 - co;
            if co > self.half_col[c] || cz > self.half_col[c] {
                return false;
            }
        }
        let mut p = 0;
        for i in 0..self.k {
            for j in i + 1..self.k {
                let idx = 2 * ((v >> i) & 1) as usize + ((v >> j) & 1) as usize;
                if st.pairs[p][idx] + 1 > self.quota {
                    return false;
                }
                p += 1;
            }
        }
        if self.symmetry && self.s + 2 == self.n {
            let s = self.s;
            if r < s && c == s && r > 0 && st.values[(r - 1) * self.n + s].is_some_and(|u| v < u) {
                return false;
            }
            if r == s && c < s && c > 0 && st.values[s * self.n + c - 1].is_some_and(|u| v < u) {
                return false;
            }
        }
        true
    }

    fn apply(&self, st: &mut SearchState, r: usize, c: usize, v: u8, sign: bool) {
        let upd = |x: &mut usize| {
            if sign {
                *x += 1
            } else {
                *x -= 1
            }
        };
        upd(&mut st.row_fill[r]);
        upd(&mut st.col_fill[c]);
        for i in 0..self.k {
            if (v >> i) & 1 == 1 {
                upd(&mut st.row_ones[r][i]);
                upd(&mut st.col_ones[c][i]);
            }
        }
        let mut p = 0;
        for i in 0..self.k {
            for j in i + 1..self.k {
                let idx = 2 * ((v >> i) & 1) as usize + ((v >> j) & 1) as usize;
                upd(&mut st.pairs[p][idx]);
                p += 1;
            }
        }
        st.values[r * self.n + c] = if sign { Some(v) } else { None };
    }

    /// Visits solutions until the visitor returns `false`; returns the number
    /// of solutions visited.
    pub fn run(&mut self, mut visit: impl FnMut(&Imofs) -> bool) -> u64 {
        let n = self.n;
        let npairs = self.k * (self.k - 1) / 2;
        let mut st = SearchState {
            values: vec![None; n * n],
            row_ones: vec![vec![0; self.k]; n],
            row_fill: vec![0; n],
            col_ones: vec![vec![0; self.k]; n],
            col_fill: vec![0; n],
            pairs: vec![[0; 4]; npairs],
        };
        let mut count = 0;
        let mut stop = false;
        self.descend(0, &mut st, &mut count, &mut stop, &mut visit);
        count
    }

    fn descend(
        &mut self,
        depth: usize,
        st: &mut SearchState,
        count: &mut u64,
        stop: &mut bool,
        visit: &mut impl FnMut(&Imofs) -> bool,
    ) {
        if *stop {
            return;
        }
        if depth == self.cells.len() {
            *count += 1;
            let imofs = self.materialize(st);
            if !visit(&imofs) {
                *stop = true;
            }
            return;
        }
        let (r, c) = self.cells[depth];
        let mut values: Vec<u8> = if self.symmetry && depth == 0 {
            vec![0]
        } else {
            (0..1u16 << self.k).map(|v| v as u8).collect()
        };
        if let Some(rng) = self.rng.as_mut() {
            values.shuffle(rng);
        }
        for v in values {
            if self.fits(st, r, c, v) {
                self.apply(st, r, c, v, true);
                self.descend(depth + 1, st, count, stop, visit);
                self.apply(st, r, c, v, false);
                if *stop {
                    return;
                }
            }
        }
    }

    fn materialize(&self, st: &SearchState) -> Imofs {
        let mut squares = vec![BitMatrix::zeros(self.n); self.k];
        for &(r, c) in &self.cells {
            place(&mut squares, r, c, st.values[r * self.n + c].unwrap() as u128);
        }
        Imofs {
            n: self.n,
            s: self.s,
            squares,
        }
    }
}

/// Exhaustively counts `k`-IMOFS(n; n-2) up to the symmetries used for
/// pruning. Zero for `k = 3` confirms non-existence.
pub fn count_imofs_corner_hole(n: usize, k: usize) -> Result<u64, EmbeddingError> {
    if n > EXHAUSTIVE_ORDER_LIMIT {
        return Err(EmbeddingError::OrderTooLarge {
            order: n,
            bound: EXHAUSTIVE_ORDER_LIMIT,
        });
    }
    if n < 4 || n % 2 != 0 {
        return Err(EmbeddingError::BadOrder(n));
    }
    Ok(ImofsSearch::new(n, n - 2, k)?
        .with_symmetry_breaking()
        .run(|_| true))
}

/// Exhaustive confirmation that no 3-IMOFS(n; n-2) exists.
pub fn no_three_imofs_witness(n: usize) -> Result<bool, EmbeddingError> {
    Ok(count_imofs_corner_hole(n, 3)? == 0)
}
