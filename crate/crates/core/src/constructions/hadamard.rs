//! Hadamard matrices (Sylvester/Kronecker, Paley I and II), the orthogonal
//! arrays they yield, and the complete sets of MOFS built from them.

use super::ConstructionError;
use crate::fsq::{content_lines, BitMatrix, MofsSet};

/// A square ±1 matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HadamardMatrix {
    n: usize,
    entries: Vec<i8>,
}

impl HadamardMatrix {
    pub fn from_entries(n: usize, entries: Vec<i8>) -> Result<Self, ConstructionError> {
        if entries.len() != n * n || entries.iter().any(|&e| e != 1 && e != -1) {
            return Err(ConstructionError::NotHadamard(n));
        }
        let h = HadamardMatrix { n, entries };
        if !h.is_hadamard() {
            return Err(ConstructionError::NotHadamard(n));
        }
        Ok(h)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> i8 {
        self.entries[r * self.n + c]
    }

    /// `H Hᵀ = n I` in exact integer arithmetic.
    pub fn is_hadamard(&self) -> bool {
        let n = self.n;
        (0..n).all(|i| {
            (i..n).all(|j| {
                let dot: i64 = (0..n).map(|c| (self.get(i, c) * self.get(j, c)) as i64).sum();
                dot == if i == j { n as i64 } else { 0 }
            })
        })
    }

    pub fn is_normalized(&self) -> bool {
        (0..self.n).all(|i| self.get(0, i) == 1 && self.get(i, 0) == 1)
    }

    pub fn normalized(&self) -> HadamardMatrix {
        let n = self.n;
        let mut e = self.entries.clone();
        for r in 0..n {
            if e[r * n] == -1 {
                for c in 0..n {
                    e[r * n + c] = -e[r * n + c];
                }
            }
        }
        for c in 0..n {
            if e[c] == -1 {
                for r in 0..n {
                    e[r * n + c] = -e[r * n + c];
                }
            }
        }
        HadamardMatrix { n, entries: e }
    }

    pub fn kronecker(&self, other: &HadamardMatrix) -> HadamardMatrix {
        let (a, b) = (self.n, other.n);
        let n = a * b;
        let mut entries = vec![0; n * n];
        for i in 0..a {
            for j in 0..a {
                for k in 0..b {
                    for l in 0..b {
                        entries[(i * b + k) * n + j * b + l] = self.get(i, j) * other.get(k, l);
                    }
                }
            }
        }
        HadamardMatrix { n, entries }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("hadamard {}\n", self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                out.push(if self.get(r, c) == 1 { '+' } else { '-' });
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, ConstructionError> {
        let mut lines = content_lines(text);
        let (_, header) = lines
            .next()
            .ok_or_else(|| ConstructionError::Parse("missing header".into()))?;
        let n: usize = header
            .strip_prefix("hadamard")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| ConstructionError::Parse("header must be `hadamard <n>`".into()))?;
        let mut entries = Vec::with_capacity(n * n);
        for _ in 0..n {
            let (lno, line) = lines
                .next()
                .ok_or_else(|| ConstructionError::Parse("too few rows".into()))?;
            let row: Vec<i8> = line
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    '+' => Ok(1),
                    '-' => Ok(-1),
                    _ => Err(ConstructionError::Parse(format!("line {lno}: bad symbol `{c}`"))),
                })
                .collect::<Result<_, _>>()?;
            if row.len() != n {
                return Err(ConstructionError::Parse(format!(
                    "line {lno}: expected {n} symbols"
                )));
            }
            entries.extend(row);
        }
        HadamardMatrix::from_entries(n, entries)
    }
}

/// A finite field GF(p^m) with elements encoded as base-p digit vectors.
struct FiniteField {
    q: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
}

fn prime_power(q: usize) -> Option<(usize, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let mut m = 0;
    let mut x = q;
    while x % p == 0 {
        x /= p;
        m += 1;
    }
    (x == 1).then_some((p, m))
}

impl FiniteField {
    fn new(q: usize) -> Option<FiniteField> {
        let (p, m) = prime_power(q)?;
        let m = m as usize;
        let digits = |mut x: usize| -> Vec<usize> {
            (0..m)
                .map(|_| {
                    let d = x % p;
                    x /= p;
                    d
                })
                .collect()
        };
        let encode = |d: &[usize]| -> usize { d.iter().rev().fold(0, |acc, &x| acc * p + x) };
        let add: Vec<u16> = (0..q * q)
            .map(|idx| {
                let (a, b) = (digits(idx / q), digits(idx % q));
                let s: Vec<usize> = a.iter().zip(&b).map(|(x, y)| (x + y) % p).collect();
                encode(&s) as u16
            })
            .collect();
        // monic modulus x^m + low; search the low part until the ring is a field
        for low in 0..q {
            let modulus = digits(low);
            let mul_poly = |a: &[usize], b: &[usize]| -> Vec<usize> {
                let mut prod = vec![0; 2 * m];
                for (i, x) in a.iter().enumerate() {
                    for (j, y) in b.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                for deg in (m..2 * m).rev() {
                    let c = prod[deg];
                    if c != 0 {
                        prod[deg] = 0;
                        for (i, &f) in modulus.iter().enumerate() {
                            let t = deg - m + i;
                            prod[t] = (prod[t] + p * p - c * f % p) % p;
                        }
                    }
                }
                prod.truncate(m);
                prod
            };
            let mul: Vec<u16> = (0..q * q)
                .map(|idx| encode(&mul_poly(&digits(idx / q), &digits(idx % q))) as u16)
                .collect();
            let field = (1..q).all(|a| (1..q).all(|b| mul[a * q + b] != 0));
            if field {
                return Some(FiniteField { q, add, mul });
            }
        }
        None
    }

    fn neg(&self, a: usize) -> usize {
        (0..self.q).find(|&b| self.add[a * self.q + b] == 0).unwrap()
    }

    /// Quadratic character as a table.
    fn chi(&self) -> Vec<i8> {
        let mut chi = vec![-1i8; self.q];
        chi[0] = 0;
        for a in 1..self.q {
            chi[self.mul[a * self.q + a] as usize] = 1;
        }
        chi
    }

    /// `Q[i][j] = chi(a_i - a_j)`.
    fn jacobsthal(&self) -> Vec<Vec<i8>> {
        let chi = self.chi();
        let q = self.q;
        (0..q)
            .map(|i| {
                (0..q)
                    .map(|j| chi[self.add[i * q + self.neg(j)] as usize])
                    .collect()
            })
            .collect()
    }
}

fn paley_one(q: usize) -> Option<HadamardMatrix> {
    let f = FiniteField::new(q)?;
    let jq = f.jacobsthal();
    let n = q + 1;
    let mut entries = vec![0i8; n * n];
    for r in 0..n {
        for c in 0..n {
            let s = match (r, c) {
                (0, 0) => 0,
                (0, _) => 1,
                (_, 0) => -1,
                _ => jq[r - 1][c - 1],
            };
            entries[r * n + c] = s + (r == c) as i8;
        }
    }
    Some(HadamardMatrix { n, entries })
}

fn paley_two(q: usize) -> Option<HadamardMatrix> {
    let f = FiniteField::new(q)?;
    let jq = f.jacobsthal();
    let m = q + 1;
    let n = 2 * m;
    let conference = |r: usize, c: usize| -> i8 {
        match (r, c) {
            (0, 0) => 0,
            (0, _) | (_, 0) => 1,
            _ => jq[r - 1][c - 1],
        }
    };
    let mut entries = vec![0i8; n * n];
    for r in 0..m {
        for c in 0..m {
            let v = conference(r, c);
            let block: [[i8; 2]; 2] = if v == 0 {
                [[1, -1], [-1, -1]]
            } else {
                [[v, v], [v, -v]]
            };
            for (i, row) in block.iter().enumerate() {
                for (j, &x) in row.iter().enumerate() {
                    entries[(2 * r + i) * n + 2 * c + j] = x;
                }
            }
        }
    }
    Some(HadamardMatrix { n, entries })
}

fn build(n: usize) -> Option<HadamardMatrix> {
    match n {
        1 => return Some(HadamardMatrix { n, entries: vec![1] }),
        2 => {
            return Some(HadamardMatrix {
                n,
                entries: vec![1, 1, 1, -1],
            })
        }
        _ if n % 4 != 0 => return None,
        _ if n.is_power_of_two() => {
            let h = build(n / 2)?;
            return Some(build(2)?.kronecker(&h));
        }
        _ => {}
    }
    let q = n - 1;
    if q % 4 == 3 && prime_power(q).is_some() {
        return paley_one(q);
    }
    let q = n / 2 - 1;
    if q % 4 == 1 && prime_power(q).is_some() {
        return paley_two(q);
    }
    let mut a = 2;
    while a * a <= n {
        if n % a == 0 {
            if let (Some(x), Some(y)) = (build(a), build(n / a)) {
                return Some(x.kronecker(&y));
            }
        }
        a += if a == 2 { 2 } else { 4 };
    }
    None
}

/// A normalized Hadamard matrix of order `n`, when one of the built-in
/// constructions reaches it.
pub fn hadamard(n: usize) -> Result<HadamardMatrix, ConstructionError> {
    let h = build(n).ok_or(ConstructionError::OrderNotSupported(n))?;
    debug_assert!(h.is_hadamard());
    Ok(h.normalized())
}

/// A two-level orthogonal array with `columns` columns and index `lambda`.
/// Row `r` holds its entry in column `j` at bit `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrthogonalArray2 {
    pub columns: usize,
    pub lambda: usize,
    pub rows: Vec<u128>,
}

impl OrthogonalArray2 {
    pub fn verify(&self) -> bool {
        if self.rows.len() != 4 * self.lambda || self.columns > 128 {
            return false;
        }
        (0..self.columns).all(|i| {
            (i + 1..self.columns).all(|j| {
                let mut counts = [0usize; 4];
                for &r in &self.rows {
                    counts[((((r >> i) & 1) << 1) | ((r >> j) & 1)) as usize] += 1;
                }
                counts.iter().all(|&c| c == self.lambda)
            })
        })
    }

    /// Keeps the first `columns` columns.
    pub fn truncated(&self, columns: usize) -> OrthogonalArray2 {
        let columns = columns.min(self.columns);
        let mask = if columns >= 128 {
            u128::MAX
        } else {
            (1u128 << columns) - 1
        };
        OrthogonalArray2 {
            columns,
            lambda: self.lambda,
            rows: self.rows.iter().map(|r| r & mask).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("oa 2 {} {}\n", self.columns, self.lambda);
        for &r in &self.rows {
            for j in 0..self.columns {
                out.push(if (r >> j) & 1 == 1 { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

/// Drops the all-ones first column of a normalized matrix and reads
/// `+1` as 1 and `-1` as 0.
pub fn oa_from_hadamard(h: &HadamardMatrix) -> Result<OrthogonalArray2, ConstructionError> {
    oa_prefix_from_hadamard(h, h.order().saturating_sub(1))
}

/// Like [`oa_from_hadamard`] but keeps only the first `columns` columns,
/// so matrices of order above 129 can be used.
pub fn oa_prefix_from_hadamard(
    h: &HadamardMatrix,
    columns: usize,
) -> Result<OrthogonalArray2, ConstructionError> {
    let n = h.order();
    if !h.is_normalized() {
        return Err(ConstructionError::NotNormalized);
    }
    if n < 4 || columns == 0 || columns >= n || columns > 128 {
        return Err(ConstructionError::OrderNotSupported(n));
    }
    let rows = (0..n)
        .map(|r| {
            (1..=columns).fold(0u128, |acc, c| {
                acc | (((h.get(r, c) == 1) as u128) << (c - 1))
            })
        })
        .collect();
    Ok(OrthogonalArray2 {
        columns,
        lambda: n / 4,
        rows,
    })
}

/// The `(n-1)^2` squares `F_{i,j}[r][c] = (1 - H[i][r] H[j][c]) / 2` for
/// `i, j >= 1`, with `i` the slower index.
pub fn complete_from_hadamard(h: &HadamardMatrix) -> Result<MofsSet, ConstructionError> {
    let n = h.order();
    if !h.is_normalized() {
        return Err(ConstructionError::NotNormalized);
    }
    if n < 2 || n % 2 != 0 {
        return Err(ConstructionError::OrderNotSupported(n));
    }
    let mut squares = Vec::with_capacity((n - 1) * (n - 1));
    for i in 1..n {
        for j in 1..n {
            squares.push(BitMatrix::from_fn(n, |r, c| h.get(i, r) != h.get(j, c)));
        }
    }
    Ok(MofsSet::new(n, squares)?)
}
