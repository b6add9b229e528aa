//! Collaborative vehicle routing between logistics service providers.
//!
//! Each LSP first routes its own orders ([`pdptw::initial_solution`]); the
//! profit of that plan is its individual-rationality floor. [`gat`] then
//! improves social welfare by exchanging orders between vehicle pairs, and
//! [`oph`] does the same with contiguous order packages. Neither ever leaves
//! an LSP below its floor.

pub mod bench;
pub mod combiner;
pub mod gat;
pub mod model;
pub mod oph;
pub mod pdptw;

#[cfg(test)]
mod testutil;
