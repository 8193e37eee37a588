//! Orthogonal mates for single frequency squares, following the row-pairing
//! argument: pair the rows so that no pair is complementary, then fill each
//! pair of rows of the mate with complementary entries chosen by quota.

use super::ConstructionError;
use crate::fsq::{row_mask, verify_pair, BitMatrix, FrequencySquare, Row};

/// Finds a perfect matching in a graph given by adjacency bitsets, by
/// depth-first search matching the lowest free vertex first.
fn perfect_matching(adj: &[Row]) -> Option<Vec<(usize, usize)>> {
    fn go(adj: &[Row], free: Row, out: &mut Vec<(usize, usize)>) -> bool {
        if free == 0 {
            return true;
        }
        let v = free.trailing_zeros() as usize;
        let rest = free & !(1 << v);
        let mut options = adj[v] & rest;
        while options != 0 {
            let u = options.trailing_zeros() as usize;
            options &= options - 1;
            out.push((v, u));
            if go(adj, rest & !(1 << u), out) {
                return true;
            }
            out.pop();
        }
        false
    }
    let mut out = Vec::with_capacity(adj.len() / 2);
    go(adj, row_mask(adj.len()), &mut out).then_some(out)
}

/// Pairs rows so that no pair is complementary. `Err(IsBachelor)` when the
/// square is the bachelor class with λ odd.
fn pair_rows(b: &BitMatrix) -> Result<Vec<(usize, usize)>, ConstructionError> {
    let n = b.order();
    let lambda = n / 2;
    let mask = row_mask(n);
    let bad = |r: usize, s: usize| b.row(r) == !b.row(s) & mask;
    let saturated = (0..n).any(|r| (0..n).filter(|&s| s != r && bad(r, s)).count() == lambda);
    if saturated {
        if lambda % 2 == 1 {
            return Err(ConstructionError::IsBachelor);
        }
        // two classes of λ identical rows each
        let mut pairs = Vec::with_capacity(lambda);
        for class in [b.row(0), !b.row(0) & mask] {
            let members: Vec<usize> = (0..n).filter(|&r| b.row(r) == class).collect();
            for p in members.chunks(2) {
                pairs.push((p[0], p[1]));
            }
        }
        return Ok(pairs);
    }
    let adj: Vec<Row> = (0..n)
        .map(|r| {
            (0..n)
                .filter(|&s| s != r && !bad(r, s))
                .fold(0, |acc, s| acc | 1 << s)
        })
        .collect();
    perfect_matching(&adj).ok_or(ConstructionError::NoMatching)
}

/// An orthogonal mate of `b`.
pub fn orthogonal_mate(b: &FrequencySquare) -> Result<FrequencySquare, ConstructionError> {
    let n = b.order();
    let lambda = n / 2;
    let mut mate = BitMatrix::zeros(n);
    for (r, s) in pair_rows(b)? {
        // column classes 1a, 1b, 2a, 2b with respect to (r, s)
        let mut classes: [Vec<usize>; 4] = Default::default();
        for c in 0..n {
            let class = match (b.get(r, c), b.get(s, c)) {
                (false, false) => 0,
                (true, true) => 1,
                (false, true) => 2,
                (true, false) => 3,
            };
            classes[class].push(c);
        }
        let (t1a, t2a) = (classes[0].len(), classes[2].len());
        let quotas = [
            lambda - t1a / 2 - 2 * t2a.div_ceil(2),
            t1a / 2,
            t2a.div_ceil(2),
            t2a.div_ceil(2),
        ];
        // type 2a in the mate: 0 in row r, 1 in row s; everything else 2b
        let mut two_a: Row = 0;
        for (cols, &q) in classes.iter().zip(&quotas) {
            for &c in &cols[..q] {
                two_a |= 1 << c;
            }
        }
        mate.set_row(r, !two_a & row_mask(n));
        mate.set_row(s, two_a);
    }
    let mate = FrequencySquare::new(mate)?;
    if !verify_pair(b, &mate)?.orthogonal {
        return Err(ConstructionError::SelfCheckFailed("mate is not orthogonal".into()));
    }
    Ok(mate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::bachelor_square;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bachelor_orders() {
        for n in [2, 6, 10, 14] {
            let a = bachelor_square(n).unwrap();
            assert_eq!(orthogonal_mate(&a), Err(ConstructionError::IsBachelor));
        }
        for n in [4, 8, 12] {
            let a = bachelor_square(n).unwrap();
            let m = orthogonal_mate(&a).unwrap();
            assert!(verify_pair(&a, &m).unwrap().orthogonal);
        }
    }

    #[test]
    fn random_order_eight_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let sq = random_square(8, &mut rng);
            let m = orthogonal_mate(&sq).unwrap();
            assert!(verify_pair(&sq, &m).unwrap().orthogonal);
        }
    }

    /// Random balanced square by permuting rows and columns of a random
    /// switch walk from the bachelor square.
    pub(crate) fn random_square(n: usize, rng: &mut ChaCha8Rng) -> FrequencySquare {
        use rand::Rng;
        let mut m = bachelor_square(n).unwrap().into_matrix();
        for _ in 0..10 * n * n {
            let r: Vec<usize> = (0..n).collect::<Vec<_>>().choose_multiple(rng, 2).copied().collect();
            let c: Vec<usize> = (0..n).collect::<Vec<_>>().choose_multiple(rng, 2).copied().collect();
            let (a, b) = (m.get(r[0], c[0]), m.get(r[0], c[1]));
            if a != b
                && m.get(r[1], c[0]) == b
                && m.get(r[1], c[1]) == a
                && rng.gen_bool(0.5)
            {
                for &x in &r {
                    for &y in &c {
                        m.flip(x, y);
                    }
                }
            }
        }
        FrequencySquare::new(m).unwrap()
    }
}
