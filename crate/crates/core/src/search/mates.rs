use rayon::prelude::*;

use super::cliques::Graph;
use super::enumerate::balanced_rows;
use super::SearchError;
use crate::fsq::{balanced_orthogonal, row_mask, BitMatrix, FrequencySquare, MofsSet, Row};

/// Largest order accepted by the mate search.
pub const MATE_ORDER_LIMIT: usize = 10;

/// Row-by-row search for squares orthogonal to every square of a set.
struct MateWalk<'a> {
    n: usize,
    base: &'a [BitMatrix],
    rows: &'a [Row],
    /// `suffix[i][d][c]`: ones of base square `i` in column `c`, rows `d..`
    suffix: Vec<Vec<Vec<u16>>>,
    col: Vec<u16>,
    overlap: Vec<u16>,
    chosen: Vec<Row>,
}

impl<'a> MateWalk<'a> {
    fn new(n: usize, base: &'a [BitMatrix], rows: &'a [Row]) -> Self {
        let suffix = base
            .iter()
            .map(|sq| {
                let mut s = vec![vec![0u16; n]; n + 1];
                for d in (0..n).rev() {
                    for c in 0..n {
                        s[d][c] = s[d + 1][c] + sq.get(d, c) as u16;
                    }
                }
                s
            })
            .collect();
        MateWalk {
            n,
            base,
            rows,
            suffix,
            col: vec![0; n],
            overlap: vec![0; base.len()],
            chosen: Vec::with_capacity(n),
        }
    }

    /// Whether the (1,1) target is still reachable for every base square.
    fn feasible(&self) -> bool {
        let n = self.n;
        let half = (n / 2) as u16;
        let d = self.chosen.len();
        let left = (n - d) as u16;
        let target = (n * n / 4) as u16;
        for (i, suf) in self.suffix.iter().enumerate() {
            let (mut lo, mut hi) = (self.overlap[i], self.overlap[i]);
            for c in 0..n {
                let need = half - self.col[c];
                let f = suf[d][c];
                lo += (need + f).saturating_sub(left);
                hi += need.min(f);
            }
            if target < lo || target > hi {
                return false;
            }
        }
        true
    }

    fn push(&mut self, r: Row) {
        let d = self.chosen.len();
        for c in 0..self.n {
            self.col[c] += ((r >> c) & 1) as u16;
        }
        for (o, sq) in self.overlap.iter_mut().zip(self.base) {
            *o += (r & sq.row(d)).count_ones() as u16;
        }
        self.chosen.push(r);
    }

    fn pop(&mut self) {
        let r = self.chosen.pop().expect("non-empty");
        let d = self.chosen.len();
        for c in 0..self.n {
            self.col[c] -= ((r >> c) & 1) as u16;
        }
        for (o, sq) in self.overlap.iter_mut().zip(self.base) {
            *o -= (r & sq.row(d)).count_ones() as u16;
        }
    }

    fn go(&mut self, visit: &mut impl FnMut(&[Row]) -> bool) -> bool {
        let n = self.n;
        let d = self.chosen.len();
        if d == n {
            return visit(&self.chosen);
        }
        let half = (n / 2) as u16;
        let left = (n - d) as u16;
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
            self.push(last);
            let ok = !self.feasible() || visit(&self.chosen);
            self.pop();
            return ok;
        }
        let rows = self.rows;
        for &r in rows {
            if r & must != must || r & full != 0 {
                continue;
            }
            self.push(r);
            let ok = !self.feasible() || self.go(visit);
            self.pop();
            if !ok {
                return false;
            }
        }
        true
    }
}

fn check(set: &MofsSet) -> Result<(), SearchError> {
    let n = set.order();
    if n > MATE_ORDER_LIMIT {
        return Err(SearchError::OrderTooLarge {
            order: n,
            bound: MATE_ORDER_LIMIT,
        });
    }
    if n == 0 || n % 2 != 0 {
        return Err(SearchError::UnsupportedOrder(n));
    }
    Ok(())
}

/// Every balanced square orthogonal to all squares of `set`, in
/// lexicographic order of rows. Independent of the thread count.
pub fn mates(set: &MofsSet) -> Result<Vec<FrequencySquare>, SearchError> {
    mate_search(set, false)
}

/// The mates with a 0 in the top-left cell: one from each complementary
/// pair of mates.
pub fn standardized_mates(set: &MofsSet) -> Result<Vec<FrequencySquare>, SearchError> {
    mate_search(set, true)
}

fn mate_search(set: &MofsSet, standardized: bool) -> Result<Vec<FrequencySquare>, SearchError> {
    check(set)?;
    let n = set.order();
    let rows = balanced_rows(n);
    let branches: Vec<Vec<Vec<Row>>> = rows
        .par_iter()
        .filter(|&&first| !standardized || first & 1 == 0)
        .map(|&first| {
            let mut walk = MateWalk::new(n, set.squares(), &rows);
            let mut found = Vec::new();
            walk.push(first);
            if walk.feasible() {
                walk.go(&mut |r: &[Row]| {
                    found.push(r.to_vec());
                    true
                });
            }
            found
        })
        .collect();
    Ok(branches
        .into_iter()
        .flatten()
        .map(|r| FrequencySquare::new(BitMatrix::from_rows(n, r)).expect("balanced by search"))
        .collect())
}

/// Whether no balanced square is orthogonal to every square of `set`.
pub fn is_maximal(set: &MofsSet) -> Result<bool, SearchError> {
    check(set)?;
    let n = set.order();
    let rows = balanced_rows(n);
    let extendable = rows.par_iter().any(|&first| {
        let mut walk = MateWalk::new(n, set.squares(), &rows);
        walk.push(first);
        let mut hit = false;
        if walk.feasible() {
            walk.go(&mut |_: &[Row]| {
                hit = true;
                false
            });
        }
        hit
    });
    Ok(!extendable)
}

/// Mates of a set, joined when orthogonal to each other.
#[derive(Clone, Debug)]
pub struct MateGraph {
    pub vertices: Vec<FrequencySquare>,
    pub graph: Graph,
}

impl MateGraph {
    pub fn from_vertices(vertices: Vec<FrequencySquare>) -> Self {
        let graph = Graph::from_predicate(vertices.len(), |u, v| {
            balanced_orthogonal(vertices[u].rows(), vertices[v].rows())
        });
        MateGraph { vertices, graph }
    }

    /// The base set extended by the vertices of a clique.
    pub fn extend(&self, base: &MofsSet, clique: &[usize]) -> Result<MofsSet, SearchError> {
        let mut set = base.clone();
        for &v in clique {
            set.push(self.vertices[v].matrix().clone())?;
        }
        Ok(set)
    }
}

/// The mate graph of a pair of orthogonal squares of order 6. Mates are
/// taken up to complementation, so every vertex has a 0 in its top-left
/// cell.
pub fn mate_graph(pair: &MofsSet) -> Result<MateGraph, SearchError> {
    if pair.order() != 6 || pair.len() != 2 {
        return Err(SearchError::Precondition {
            what: format!(
                "a pair of squares of order 6, got {} squares of order {}",
                pair.len(),
                pair.order()
            ),
        });
    }
    Ok(MateGraph::from_vertices(standardized_mates(pair)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::bachelor_square;
    use crate::fsq::verify_pair;
    use crate::search::enumerate_squares;

    #[test]
    fn empty_base_gives_every_square() {
        let all = mates(&MofsSet::empty(4)).unwrap();
        assert_eq!(all, enumerate_squares(4, false).unwrap());
    }

    #[test]
    fn agrees_with_brute_force_at_four() {
        let all = enumerate_squares(4, false).unwrap();
        for f in &all {
            let set = MofsSet::new(4, vec![f.matrix().clone()]).unwrap();
            let brute: Vec<_> = all
                .iter()
                .filter(|g| verify_pair(f, g).unwrap().orthogonal)
                .cloned()
                .collect();
            assert_eq!(mates(&set).unwrap(), brute);
        }
    }

    #[test]
    fn bachelor_has_no_mate() {
        let set = MofsSet::new(6, vec![bachelor_square(6).unwrap().into_matrix()]).unwrap();
        assert!(mates(&set).unwrap().is_empty());
        assert!(is_maximal(&set).unwrap());
        let set = MofsSet::new(4, vec![bachelor_square(4).unwrap().into_matrix()]).unwrap();
        assert!(!is_maximal(&set).unwrap());
    }

    #[test]
    fn order_bound() {
        assert!(matches!(
            mates(&MofsSet::empty(12)),
            Err(SearchError::OrderTooLarge { .. })
        ));
    }
}
