//! Exact extremal combinatorics on the Boolean lattice `2^[n]` and the
//! lattice of subspaces of `F_q^n`.

pub mod bitset;
pub mod cli;
pub mod covering_lym;
pub mod error;
pub mod extremal_search;
pub mod family_properties;
pub mod finite_field;
pub mod qcombinatorics;
pub mod subspace_lattice;

pub use error::{Error, Result};
