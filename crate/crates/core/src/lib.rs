//! Mutually orthogonal binary frequency squares: verification, constructions,
//! trades, embeddings, searches and the associated designs.

pub mod fsq;
pub mod constructions;
pub mod data;
pub mod designs;
pub mod embeddings;
pub mod relations;
pub mod search;
pub mod trades;
