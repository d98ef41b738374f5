//! Chapters of the guide, compiled as doc-tests.

#[doc = include_str!("../../../book/src/intro.md")]
pub mod intro {}
#[doc = include_str!("../../../book/src/finite-fields.md")]
pub mod finite_fields {}
#[doc = include_str!("../../../book/src/subspaces.md")]
pub mod subspaces {}
#[doc = include_str!("../../../book/src/q-binomials.md")]
pub mod q_binomials {}
#[doc = include_str!("../../../book/src/properties.md")]
pub mod properties {}
#[doc = include_str!("../../../book/src/search.md")]
pub mod search {}
#[doc = include_str!("../../../book/src/covering-lym.md")]
pub mod covering_lym {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
#[doc = include_str!("../../../book/src/acceptance.md")]
pub mod acceptance {}
