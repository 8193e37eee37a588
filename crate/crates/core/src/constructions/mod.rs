//! Constructive existence results: Hadamard matrices and the complete sets
//! they give, the bachelor square and orthogonal mates, the 5-maxMOFS family
//! and 17-MOFS of every order 2 mod 4.

mod five_max;
mod hadamard;
mod mate;
mod seventeen;

pub use five_max::five_max;
pub use hadamard::{
    complete_from_hadamard, hadamard, oa_from_hadamard, oa_prefix_from_hadamard, HadamardMatrix,
    OrthogonalArray2,
};
pub use mate::orthogonal_mate;
pub use seventeen::{seventeen, seventeen_plan, SeventeenPlan};

use thiserror::Error;

use crate::embeddings::EmbeddingError;
use crate::fsq::{BitMatrix, FrequencySquare, FsqError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("no built-in construction reaches order {0}; load it from a file")]
    OrderNotSupported(usize),
    #[error("matrix of order {0} is not a Hadamard matrix")]
    NotHadamard(usize),
    #[error("Hadamard matrix is not normalized")]
    NotNormalized,
    #[error("the square is a bachelor: lambda is odd and it is isomorphic to the block square")]
    IsBachelor,
    #[error("no perfect matching of non-complementary row pairs")]
    NoMatching,
    #[error("order {0} is not supported here: {1}")]
    BadOrder(usize, &'static str),
    #[error("hadamard file: {0}")]
    Parse(String),
    #[error("bundled data: {0}")]
    MissingData(String),
    #[error("self-check failed: {0}")]
    SelfCheckFailed(String),
    #[error(transparent)]
    Fsq(#[from] FsqError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

/// The square with constant `λ x λ` blocks `[[0, 1], [1, 0]]`.
pub fn bachelor_square(n: usize) -> Result<FrequencySquare, FsqError> {
    if n % 2 != 0 {
        return Err(FsqError::OddOrder(n));
    }
    let h = n / 2;
    FrequencySquare::new(BitMatrix::from_fn(n, |r, c| (r < h) != (c < h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::{certify_maximal, find_relation};
    use crate::fsq::MofsSet;

    #[test]
    fn bachelor_square_shape() {
        let a = bachelor_square(4).unwrap();
        assert_eq!(
            a.to_bits(),
            vec![vec![0, 0, 1, 1], vec![0, 0, 1, 1], vec![1, 1, 0, 0], vec![1, 1, 0, 0]]
        );
        assert_eq!(bachelor_square(5), Err(FsqError::OddOrder(5)));
        let s = MofsSet::from_squares(vec![bachelor_square(6).unwrap()]).unwrap();
        let rel = find_relation(&s, false).unwrap().unwrap();
        assert_eq!(rel.rows, vec![0, 1, 2]);
        assert_eq!(rel.cols, vec![0, 1, 2]);
        assert!(certify_maximal(&s).is_certified());
    }
}
