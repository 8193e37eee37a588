//! Resolvable designs read off complete sets, and the order test for complete
//! sets.

use std::fmt;

use thiserror::Error;

use crate::constructions::hadamard;
use crate::fsq::{z2_sum, MofsSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DesignError {
    #[error("a complete set of order {order} has {need} squares, got {have}")]
    NotComplete { order: usize, have: usize, need: usize },
    #[error("order {0} is not supported here: {1}")]
    BadOrder(usize, &'static str),
    #[error("design built from the set fails verification: {0}")]
    SelfCheckFailed(String),
    #[error("design file line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Blocks are sorted lists of points `1..=v`, grouped into parallel classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvableDesign {
    pub v: usize,
    pub k: usize,
    pub lambda: usize,
    pub classes: Vec<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DesignViolation {
    BlockSize { class: usize, block: usize, size: usize },
    PointOutOfRange { class: usize, point: usize },
    NotAPartition { class: usize },
    PairCount { a: usize, b: usize, count: usize },
}

impl fmt::Display for DesignViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignViolation::BlockSize { class, block, size } => {
                write!(f, "class {class} block {block} has {size} points")
            }
            DesignViolation::PointOutOfRange { class, point } => {
                write!(f, "class {class} uses point {point}")
            }
            DesignViolation::NotAPartition { class } => {
                write!(f, "class {class} does not partition the points")
            }
            DesignViolation::PairCount { a, b, count } => {
                write!(f, "pair {{{a},{b}}} lies in {count} blocks")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DesignReport {
    pub violations: Vec<DesignViolation>,
}

impl DesignReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for DesignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Block sizes, parallel classes and pair counts, all exact.
pub fn verify_design(d: &ResolvableDesign) -> DesignReport {
    let mut violations = Vec::new();
    let mut pairs = vec![vec![0usize; d.v + 1]; d.v + 1];
    for (ci, class) in d.classes.iter().enumerate() {
        let mut hits = vec![0usize; d.v + 1];
        let mut in_range = true;
        for (bi, block) in class.iter().enumerate() {
            if block.len() != d.k {
                violations.push(DesignViolation::BlockSize {
                    class: ci + 1,
                    block: bi + 1,
                    size: block.len(),
                });
            }
            for &p in block {
                if p == 0 || p > d.v {
                    violations.push(DesignViolation::PointOutOfRange { class: ci + 1, point: p });
                    in_range = false;
                    continue;
                }
                hits[p] += 1;
            }
            for (i, &a) in block.iter().enumerate() {
                for &b in &block[i + 1..] {
                    if (1..=d.v).contains(&a) && (1..=d.v).contains(&b) && a != b {
                        pairs[a.min(b)][a.max(b)] += 1;
                    }
                }
            }
        }
        if !in_range || hits[1..].iter().any(|&h| h != 1) {
            violations.push(DesignViolation::NotAPartition { class: ci + 1 });
        }
    }
    for a in 1..=d.v {
        for b in a + 1..=d.v {
            if pairs[a][b] != d.lambda {
                violations.push(DesignViolation::PairCount { a, b, count: pairs[a][b] });
            }
        }
    }
    DesignReport { violations }
}

fn require_complete(set: &MofsSet) -> Result<(), DesignError> {
    let n = set.order();
    let need = n.saturating_sub(1).pow(2);
    if set.len() != need || n < 2 {
        return Err(DesignError::NotComplete {
            order: n,
            have: set.len(),
            need,
        });
    }
    Ok(())
}

/// For every square, the columns holding 0 and the columns holding 1 in
/// its first row form one parallel class of a resolvable
/// `(n, n/2, (n-1)(n-2)/2)` design.
pub fn design_from_complete(set: &MofsSet) -> Result<ResolvableDesign, DesignError> {
    require_complete(set)?;
    let n = set.order();
    let classes = set
        .squares()
        .iter()
        .map(|sq| {
            let row = sq.row(0);
            let zero = (0..n).filter(|&c| (row >> c) & 1 == 0).map(|c| c + 1).collect();
            let one = (0..n).filter(|&c| (row >> c) & 1 == 1).map(|c| c + 1).collect();
            vec![zero, one]
        })
        .collect();
    let d = ResolvableDesign {
        v: n,
        k: n / 2,
        lambda: (n - 1) * (n - 2) / 2,
        classes,
    };
    let report = verify_design(&d);
    if !report.is_valid() {
        return Err(DesignError::SelfCheckFailed(report.to_string()));
    }
    Ok(d)
}

/// For a complete set of order `n = 0 mod 4`: complement every square with
/// a 0 in its top-left cell, then test whether the Z2-sum is all ones.
pub fn standardized_z2_allones(set: &MofsSet) -> Result<bool, DesignError> {
    let n = set.order();
    if n % 4 != 0 {
        return Err(DesignError::BadOrder(n, "needs n = 0 mod 4"));
    }
    require_complete(set)?;
    let flipped = set
        .squares()
        .iter()
        .map(|sq| if sq.get(0, 0) { sq.clone() } else { sq.complement() })
        .collect();
    let flipped = MofsSet::new(n, flipped).expect("same order");
    let sum = z2_sum(&flipped);
    Ok((0..n).all(|r| sum.row_ones(r) == n))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompleteVerdict {
    /// No complete set exists.
    Impossible(String),
    /// A complete set exists if a Hadamard matrix of this order does;
    /// `witness` tells whether the built-in constructions produce one.
    IfHadamard { witness: bool },
}

pub fn complete_mofs_possible(n: usize) -> Result<CompleteVerdict, DesignError> {
    if n <= 2 || n % 2 != 0 {
        return Err(DesignError::BadOrder(n, "needs even n > 2"));
    }
    let k = n / 2;
    if k % 2 == 1 {
        return Ok(CompleteVerdict::Impossible(format!(
            "a complete set would give a resolvable ({n},{k},{}) design, which cannot exist \
             when {k} and {} are both odd",
            (n - 1) * (k - 1),
            n - 1
        )));
    }
    Ok(CompleteVerdict::IfHadamard {
        witness: hadamard(n).is_ok(),
    })
}

/// Exhaustive search for a resolvable `(v, k, lambda)` design over the
/// multiset of parallel classes. Practical for `v <= 8`.
pub fn find_resolvable_design(
    v: usize,
    k: usize,
    lambda: usize,
) -> Result<Option<ResolvableDesign>, DesignError> {
    if v == 0 || k < 2 || v % k != 0 || v > 8 {
        return Err(DesignError::BadOrder(v, "needs k >= 2 dividing v <= 8"));
    }
    if (lambda * (v - 1)) % (k - 1) != 0 {
        return Ok(None);
    }
    let classes_needed = lambda * (v - 1) / (k - 1);
    let types = partitions(v, k);
    let pair_index = |a: usize, b: usize| a * v + b;
    // pairs covered by each class type
    let covers: Vec<Vec<usize>> = types
        .iter()
        .map(|t| {
            let mut ps = Vec::new();
            for block in t {
                for (i, &a) in block.iter().enumerate() {
                    for &b in &block[i + 1..] {
                        ps.push(pair_index(a, b));
                    }
                }
            }
            ps
        })
        .collect();
    let mut count = vec![0usize; v * v];
    let mut mult = vec![0usize; types.len()];
    let found = fill(0, classes_needed, lambda, v, &covers, &mut count, &mut mult);
    Ok(found.then(|| ResolvableDesign {
        v,
        k,
        lambda,
        classes: types
            .iter()
            .zip(&mult)
            .flat_map(|(t, &m)| {
                let class: Vec<Vec<usize>> = t.iter().map(|b| b.iter().map(|p| p + 1).collect()).collect();
                std::iter::repeat(class).take(m)
            })
            .collect(),
    }))
}

fn fill(
    t: usize,
    left: usize,
    lambda: usize,
    v: usize,
    covers: &[Vec<usize>],
    count: &mut [usize],
    mult: &mut [usize],
) -> bool {
    if t == covers.len() {
        return left == 0 && (0..v).all(|a| (a + 1..v).all(|b| count[a * v + b] == lambda));
    }
    // every pair still short must be covered by some later type
    for a in 0..v {
        for b in a + 1..v {
            let deficit = lambda - count[a * v + b];
            if deficit > 0 && !covers[t..].iter().any(|c| c.contains(&(a * v + b))) {
                return false;
            }
            if deficit > left {
                return false;
            }
        }
    }
    let max = covers[t].iter().map(|&p| lambda - count[p]).min().unwrap_or(0).min(left);
    for m in (0..=max).rev() {
        for &p in &covers[t] {
            count[p] += m;
        }
        mult[t] = m;
        if fill(t + 1, left - m, lambda, v, covers, count, mult) {
            return true;
        }
        for &p in &covers[t] {
            count[p] -= m;
        }
    }
    mult[t] = 0;
    false
}

/// Partitions of `0..v` into blocks of size `k`, each block sorted and
/// blocks ordered by least point.
fn partitions(v: usize, k: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(left: Vec<usize>, k: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if left.is_empty() {
            out.push(cur.clone());
            return;
        }
        let first = left[0];
        let rest = &left[1..];
        for combo in combinations(rest, k - 1) {
            let mut block = vec![first];
            block.extend(&combo);
            let remaining: Vec<usize> = rest.iter().copied().filter(|p| !combo.contains(p)).collect();
            cur.push(block);
            rec(remaining, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec((0..v).collect(), k, &mut Vec::new(), &mut out);
    out
}

fn combinations(items: &[usize], r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![Vec::new()];
    }
    if items.len() < r {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut tail in combinations(&items[i + 1..], r - 1) {
            tail.insert(0, x);
            out.push(tail);
        }
    }
    out
}

impl ResolvableDesign {
    pub fn block_count(&self) -> usize {
        self.classes.iter().map(Vec::len).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("design {} {} {}\n", self.v, self.k, self.lambda);
        for (i, class) in self.classes.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            for block in class {
                let pts: Vec<String> = block.iter().map(ToString::to_string).collect();
                out.push_str(&pts.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<ResolvableDesign, DesignError> {
        let err = |line: usize, msg: &str| DesignError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let (hl, header) = lines
            .by_ref()
            .find(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .ok_or_else(|| err(1, "missing header"))?;
        let nums: Vec<usize> = header
            .strip_prefix("design ")
            .map(|r| r.split_whitespace().filter_map(|t| t.parse().ok()).collect())
            .unwrap_or_default();
        let [v, k, lambda] = nums[..] else {
            return Err(err(hl, "expected `design <v> <k> <lambda>`"));
        };
        let mut classes: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut current: Vec<Vec<usize>> = Vec::new();
        for (ln, line) in lines {
            if line.starts_with('#') {
                continue;
            }
            if line.is_empty() {
                if !current.is_empty() {
                    classes.push(std::mem::take(&mut current));
                }
                continue;
            }
            let mut block: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| err(ln, &format!("bad point `{t}`"))))
                .collect::<Result<_, _>>()?;
            block.sort_unstable();
            current.push(block);
        }
        if !current.is_empty() {
            classes.push(current);
        }
        Ok(ResolvableDesign { v, k, lambda, classes })
    }
}
