//! The "FSQ v1" text format.
//!
//! ```text
//! mofs <n> <k>
//! <n lines of n whitespace-separated k-character binary strings>
//! ```
//!
//! The `mofs-dec <n> <k>` variant writes each cell as the decimal value of
//! its k-bit string. In both forms the first square is the most significant
//! (leftmost) bit. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write;

use super::{BitMatrix, FsqError, MofsSet, MAX_ORDER};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FsqEncoding {
    Binary,
    Decimal,
}

/// Decodes a superposition written as decimal integers. Square `i`
/// (0-based) takes bit `k - 1 - i` of each entry.
pub fn decode_superposition<R: AsRef<[u128]>>(rows: &[R], k: usize) -> Result<MofsSet, FsqError> {
    let n = rows.len();
    if n == 0 || n > MAX_ORDER {
        return Err(FsqError::UnsupportedOrder(n));
    }
    if k > 128 {
        return Err(FsqError::DimensionMismatch(format!(
            "decimal entries hold at most 128 squares, got {k}"
        )));
    }
    let mut squares = vec![BitMatrix::zeros(n); k];
    for (r, row) in rows.iter().enumerate() {
        let row = row.as_ref();
        if row.len() != n {
            return Err(FsqError::DimensionMismatch(format!(
                "row {} has {} entries, expected {n}",
                r + 1,
                row.len()
            )));
        }
        for (c, &value) in row.iter().enumerate() {
            if k < 128 && value >> k != 0 {
                return Err(FsqError::EntryOutOfRange {
                    row: r + 1,
                    col: c + 1,
                    value,
                    k,
                });
            }
            for (i, sq) in squares.iter_mut().enumerate() {
                if (value >> (k - 1 - i)) & 1 == 1 {
                    sq.set(r, c, true);
                }
            }
        }
    }
    MofsSet::new(n, squares)
}

/// Inverse of [`decode_superposition`].
pub fn encode_superposition(set: &MofsSet) -> Vec<Vec<u128>> {
    let n = set.order();
    let k = set.len();
    assert!(k <= 128, "decimal encoding holds at most 128 squares");
    (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    set.squares()
                        .iter()
                        .enumerate()
                        .fold(0u128, |acc, (i, s)| {
                            acc | ((s.get(r, c) as u128) << (k - 1 - i))
                        })
                })
                .collect()
        })
        .collect()
}

pub fn write_fsq(set: &MofsSet) -> String {
    let n = set.order();
    let mut out = format!("mofs {} {}\n", n, set.len());
    for r in 0..n {
        let cells: Vec<String> = (0..n)
            .map(|c| {
                set.squares()
                    .iter()
                    .map(|s| if s.get(r, c) { '1' } else { '0' })
                    .collect()
            })
            .collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn write_fsq_decimal(set: &MofsSet) -> String {
    let mut out = format!("mofs-dec {} {}\n", set.order(), set.len());
    for row in encode_superposition(set) {
        let mut line = String::new();
        for (c, v) in row.iter().enumerate() {
            if c > 0 {
                line.push(' ');
            }
            write!(line, "{v}").unwrap();
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> FsqError {
    FsqError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Significant lines with their 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses either FSQ v1 variant.
pub fn parse_fsq(text: &str) -> Result<MofsSet, FsqError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(0, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_err(hline, "header must be `mofs <n> <k>`"));
    }
    let encoding = match fields[0] {
        "mofs" => FsqEncoding::Binary,
        "mofs-dec" => FsqEncoding::Decimal,
        other => return Err(parse_err(hline, format!("unknown header `{other}`"))),
    };
    let n: usize = fields[1]
        .parse()
        .map_err(|_| parse_err(hline, "bad order"))?;
    let k: usize = fields[2]
        .parse()
        .map_err(|_| parse_err(hline, "bad square count"))?;
    if n == 0 || n > MAX_ORDER {
        return Err(parse_err(hline, format!("unsupported order {n}")));
    }
    if k == 0 || (encoding == FsqEncoding::Decimal && k > 128) {
        return Err(parse_err(hline, format!("unsupported square count {k}")));
    }
    let mut squares = vec![BitMatrix::zeros(n); k];
    let mut decimal_rows = Vec::with_capacity(n);
    for r in 0..n {
        let (lno, line) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("expected {n} rows, found {r}")))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != n {
            return Err(parse_err(
                lno,
                format!("expected {n} entries, found {}", tokens.len()),
            ));
        }
        match encoding {
            FsqEncoding::Binary => {
                for (c, tok) in tokens.iter().enumerate() {
                    if tok.len() != k {
                        return Err(parse_err(lno, format!("entry `{tok}` is not {k} bits")));
                    }
                    for (i, ch) in tok.chars().enumerate() {
                        match ch {
                            '0' => {}
                            '1' => squares[i].set(r, c, true),
                            _ => return Err(parse_err(lno, format!("bad digit in `{tok}`"))),
                        }
                    }
                }
            }
            FsqEncoding::Decimal => {
                let row = tokens
                    .iter()
                    .map(|t| {
                        t.parse::<u128>()
                            .map_err(|_| parse_err(lno, format!("bad integer `{t}`")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                decimal_rows.push(row);
            }
        }
    }
    if let Some((lno, _)) = lines.next() {
        return Err(parse_err(lno, "trailing content after the last row"));
    }
    match encoding {
        FsqEncoding::Binary => MofsSet::new(n, squares),
        FsqEncoding::Decimal => decode_superposition(&decimal_rows, k),
    }
}
