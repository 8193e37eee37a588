//! Squares built from a 2x2 arrangement of circulant blocks. Each block is
//! fixed by its first row, so a square is determined by its row 1 and its
//! row `n/2 + 1`.

use super::cliques::cliques_at_least;
use super::mates::MateGraph;
use super::SearchError;
use crate::fsq::{BitMatrix, FrequencySquare, MofsSet, Row};
use crate::relations::find_relation;

fn check(n: usize) -> Result<(), SearchError> {
    if n < 2 || n > 10 || n % 2 != 0 {
        return Err(SearchError::UnsupportedOrder(n));
    }
    Ok(())
}

/// Square whose blocks are the circulants generated by the halves of
/// `first` (top) and `middle` (bottom): `B[r][c] = g[(c - r) mod n/2]`.
fn circulant_square(n: usize, first: Row, middle: Row) -> BitMatrix {
    let h = n / 2;
    BitMatrix::from_fn(n, |r, c| {
        let gen = if r < h { first } else { middle };
        let (rr, cc) = (r % h, c % h);
        let base = if c < h { 0 } else { h };
        (gen >> (base + (cc + h - rr) % h)) & 1 == 1
    })
}

/// Rebuilds a block-circulant set from row 1 and row `n/2 + 1` of its
/// decimal superposition (square 1 in the most significant bit). The
/// result is not verified.
pub fn reconstruct_circulant(
    n: usize,
    k: usize,
    first: &[Row],
    middle: &[Row],
) -> Result<MofsSet, SearchError> {
    check(n)?;
    if first.len() != n || middle.len() != n || k == 0 || k > 128 {
        return Err(SearchError::Precondition {
            what: format!("two rows of {n} entries and 1..=128 squares"),
        });
    }
    let bit_row = |row: &[Row], i: usize| -> Row {
        row.iter()
            .enumerate()
            .fold(0, |acc, (c, &e)| acc | (((e >> (k - 1 - i)) & 1) << c))
    };
    let squares = (0..k)
        .map(|i| circulant_square(n, bit_row(first, i), bit_row(middle, i)))
        .collect();
    Ok(MofsSet::new(n, squares)?)
}

/// Every balanced block-circulant square of order `n` with a 0 in its
/// top-left cell.
pub fn circulant_candidates(n: usize) -> Result<Vec<FrequencySquare>, SearchError> {
    check(n)?;
    let mut out = Vec::new();
    for first in 0..1u128 << n {
        if first & 1 == 1 || first.count_ones() as usize != n / 2 {
            continue;
        }
        for middle in 0..1u128 << n {
            if middle.count_ones() as usize != n / 2 {
                continue;
            }
            if let Ok(sq) = FrequencySquare::new(circulant_square(n, first, middle)) {
                out.push(sq);
            }
        }
    }
    out.sort_by(|a, b| a.matrix().cmp(b.matrix()));
    Ok(out)
}

/// Maximal sets of at least `k` pairwise orthogonal block-circulant squares,
/// optionally only those with a full relation of the given signature.
pub fn block_circulant_search(
    n: usize,
    k: usize,
    relation: Option<(usize, usize)>,
    node_budget: Option<u64>,
) -> Result<Vec<MofsSet>, SearchError> {
    let graph = MateGraph::from_vertices(circulant_candidates(n)?);
    let cliques = cliques_at_least(&graph.graph, k, node_budget)?;
    let mut out = Vec::new();
    for clique in cliques {
        let set = graph.extend(&MofsSet::empty(n), &clique)?;
        let keep = match relation {
            None => true,
            Some((a, b)) => matches!(
                find_relation(&set, true),
                Ok(Some(rel)) if rel.has_signature(n, a, b)
            ),
        };
        if keep {
            out.push(set);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;
    use crate::fsq::verify_mofs;

    #[test]
    fn bundled_rows_rebuild_valid_sets() {
        for (name, k) in [("mofs-10-circ-17.txt", 17), ("mofs-10-circ-9.txt", 9)] {
            let rows = data::circulant_rows(name).unwrap();
            let set = reconstruct_circulant(10, rows.squares, &rows.first, &rows.middle).unwrap();
            assert_eq!(set.len(), k);
            assert!(verify_mofs(&set).is_valid(), "{name}");
        }
    }

    #[test]
    fn identical_rows_are_not_orthogonal() {
        let row = vec![0b11u128; 10];
        let set = reconstruct_circulant(10, 2, &row, &row).unwrap();
        assert!(!verify_mofs(&set).is_valid());
        assert!(matches!(
            reconstruct_circulant(12, 2, &row, &row),
            Err(SearchError::UnsupportedOrder(12))
        ));
    }

    #[test]
    fn candidate_counts() {
        // sum over w of C(h, w)^4, halved by the top-left normalization
        assert_eq!(circulant_candidates(6).unwrap().len(), 82);
        assert_eq!(circulant_candidates(10).unwrap().len(), 10626);
    }

    #[test]
    fn order_six_search_finds_nine_squares() {
        let sets = block_circulant_search(6, 9, None, None).unwrap();
        assert!(!sets.is_empty());
        for s in &sets {
            assert!(verify_mofs(s).is_valid());
        }
    }
}
