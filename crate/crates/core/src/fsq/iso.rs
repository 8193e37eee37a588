use rand::seq::SliceRandom;
use rand::Rng;

use super::{BitMatrix, FsqError, MofsSet};

/// A combination of the isomorphism operations on a set of squares.
///
/// Applying it to a set `S` yields `T` with
/// `T[p](r, c) = S'[square_perm[p]](row_perm[r], col_perm[c]) ^ complement[square_perm[p]]`,
/// where `S'` is `S` transposed if `transpose` is set. The complement mask is
/// indexed by the original square position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Isomorphism {
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
    pub transpose: bool,
    pub complement: Vec<bool>,
    pub square_perm: Vec<usize>,
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

fn compose(outer: &[usize], inner: &[usize]) -> Vec<usize> {
    inner.iter().map(|&i| outer[i]).collect()
}

impl Isomorphism {
    pub fn identity(n: usize, k: usize) -> Self {
        Isomorphism {
            row_perm: (0..n).collect(),
            col_perm: (0..n).collect(),
            transpose: false,
            complement: vec![false; k],
            square_perm: (0..k).collect(),
        }
    }

    pub fn transpose_only(n: usize, k: usize) -> Self {
        Isomorphism {
            transpose: true,
            ..Isomorphism::identity(n, k)
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Self {
        let mut row_perm: Vec<usize> = (0..n).collect();
        let mut col_perm: Vec<usize> = (0..n).collect();
        let mut square_perm: Vec<usize> = (0..k).collect();
        row_perm.shuffle(rng);
        col_perm.shuffle(rng);
        square_perm.shuffle(rng);
        Isomorphism {
            row_perm,
            col_perm,
            transpose: rng.gen(),
            complement: (0..k).map(|_| rng.gen()).collect(),
            square_perm,
        }
    }

    pub fn check(&self, n: usize, k: usize) -> Result<(), FsqError> {
        if self.row_perm.len() != n || !is_permutation(&self.row_perm) {
            return Err(FsqError::DimensionMismatch("row permutation".into()));
        }
        if self.col_perm.len() != n || !is_permutation(&self.col_perm) {
            return Err(FsqError::DimensionMismatch("column permutation".into()));
        }
        if self.square_perm.len() != k || !is_permutation(&self.square_perm) {
            return Err(FsqError::DimensionMismatch("square permutation".into()));
        }
        if self.complement.len() != k {
            return Err(FsqError::DimensionMismatch("complement mask".into()));
        }
        Ok(())
    }

    /// The isomorphism that applies `self` and then `next`.
    pub fn then(&self, next: &Isomorphism) -> Isomorphism {
        let (row_perm, col_perm) = if next.transpose {
            (
                compose(&self.col_perm, &next.row_perm),
                compose(&self.row_perm, &next.col_perm),
            )
        } else {
            (
                compose(&self.row_perm, &next.row_perm),
                compose(&self.col_perm, &next.col_perm),
            )
        };
        let square_perm = compose(&self.square_perm, &next.square_perm);
        // next's mask is indexed by positions in self's output
        let mut position = vec![0; self.square_perm.len()];
        for (p, &orig) in self.square_perm.iter().enumerate() {
            position[orig] = p;
        }
        let complement = (0..self.complement.len())
            .map(|orig| self.complement[orig] ^ next.complement[position[orig]])
            .collect();
        Isomorphism {
            row_perm,
            col_perm,
            transpose: self.transpose ^ next.transpose,
            complement,
            square_perm,
        }
    }
}

pub fn apply_isomorphism(set: &MofsSet, iso: &Isomorphism) -> Result<MofsSet, FsqError> {
    iso.check(set.order(), set.len())?;
    let squares: Vec<BitMatrix> = iso
        .square_perm
        .iter()
        .map(|&src| {
            let base = set.square(src);
            let base = if iso.transpose {
                base.transpose()
            } else {
                base.clone()
            };
            let moved = base.permuted(&iso.row_perm, &iso.col_perm);
            if iso.complement[src] {
                moved.complement()
            } else {
                moved
            }
        })
        .collect();
    MofsSet::new(set.order(), squares)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fsq::verify_mofs;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_mofs4() -> MofsSet {
        let f = BitMatrix::from_bits(&[[0, 1, 0, 1], [1, 0, 1, 0], [0, 1, 0, 1], [1, 0, 1, 0]]);
        let g = BitMatrix::from_bits(&[[1, 0, 1, 0], [0, 1, 0, 1], [0, 1, 0, 1], [1, 0, 1, 0]]);
        MofsSet::new(4, vec![f, g]).unwrap()
    }

    #[test]
    fn identity_and_double_transpose() {
        let s = two_mofs4();
        assert_eq!(apply_isomorphism(&s, &Isomorphism::identity(4, 2)).unwrap(), s);
        let t = Isomorphism::transpose_only(4, 2);
        let once = apply_isomorphism(&s, &t).unwrap();
        assert_ne!(once, s);
        assert_eq!(apply_isomorphism(&once, &t).unwrap(), s);
    }

    #[test]
    fn dimension_mismatch() {
        let s = two_mofs4();
        assert!(matches!(
            apply_isomorphism(&s, &Isomorphism::identity(4, 3)),
            Err(FsqError::DimensionMismatch(_))
        ));
        let mut bad = Isomorphism::identity(4, 2);
        bad.row_perm = vec![0, 0, 1, 2];
        assert!(apply_isomorphism(&s, &bad).is_err());
    }

    proptest! {
        #[test]
        fn composition_matches_sequential_application(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = two_mofs4();
            let a = Isomorphism::random(4, 2, &mut rng);
            let b = Isomorphism::random(4, 2, &mut rng);
            let seq = apply_isomorphism(&apply_isomorphism(&s, &a).unwrap(), &b).unwrap();
            let direct = apply_isomorphism(&s, &a.then(&b)).unwrap();
            prop_assert_eq!(&seq, &direct);
            prop_assert!(verify_mofs(&seq).is_valid());
        }
    }
}
