//! Knowledge extraction over object-oriented dynamic networks.

pub mod cli;
pub mod exploiters;
pub mod expr;
pub mod kbio;
pub mod lattice;
pub mod model;
