//! Exhaustive searches: square enumeration, orthogonal mates, mate graphs and
//! their cliques, block-circulant sets of order 10 and a resumable census.

mod census;
mod circulant;
mod cliques;
mod enumerate;
mod mates;

pub use census::{census, orthogonal_pair_classes, CensusConfig, CensusRecord, CHECKPOINT_MAGIC};
pub use circulant::{block_circulant_search, circulant_candidates, reconstruct_circulant};
pub use cliques::{cliques_at_least, CliqueSearch, Graph};
pub use enumerate::{
    balanced_rows, count_squares, enumerate_squares, for_each_square, is_bachelor_class,
    CLASS_ORDER_LIMIT, RAW_LIST_LIMIT, RAW_ORDER_LIMIT,
};
pub use mates::{
    is_maximal, mate_graph, mates, standardized_mates, MateGraph, MATE_ORDER_LIMIT,
};

use thiserror::Error;

use crate::data::DataError;
use crate::fsq::FsqError;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("order {order} exceeds the search bound {bound}")]
    OrderTooLarge { order: usize, bound: usize },
    #[error("order {0} is not supported by this search")]
    UnsupportedOrder(usize),
    #[error("search needs {what}")]
    Precondition { what: String },
    #[error("node budget exhausted after {nodes} nodes; {} cliques found so far", partial.len())]
    Timeout { nodes: u64, partial: Vec<Vec<usize>> },
    #[error("checkpoint {0}")]
    Checkpoint(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Fsq(#[from] FsqError),
    #[error(transparent)]
    Data(#[from] DataError),
}
