//! A stand-off annotation corpus engine.
//!
//! Resources follow the LAF picture: an immutable primary text, regions
//! addressed by character anchors, nodes linked to regions, directed
//! edges, and flat key-value annotations in named spaces. The crate
//! parses GrAF-style XML resources into a validated [`model::Graph`],
//! compiles the graph into a columnar [`corpus::CompiledCorpus`] that
//! persists as a binary bundle with selective feature loading, and
//! layers analyses on top: ordered walks and neighbourhood access,
//! frequency tables, presence/absence cooccurrence, treebank export
//! with discontinuous constituents, and common tree-fragment mining.

pub mod bundle;
pub mod cooccur;
pub mod corpus;
pub mod fabric;
pub mod fixtures;
pub mod fragments;
pub mod freq;
pub mod model;
pub mod order;
pub mod parser;
pub mod treebank;
