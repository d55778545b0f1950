//! Retrieval-based second response generation.
//!
//! Given a user query and a short first response from a chatbot, this crate
//! retrieves candidate follow-up sentences keyed on the first response, ranks
//! them against the query with three learned feature models, and decides
//! stochastically whether to append the winner.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, configuration,
//! the CLI and the HTTP service live in the `improv` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod engine;
pub mod error;
pub mod index;
pub mod models;
pub mod ranker;
pub mod text;
pub mod trigger;

pub use error::{Error, Result};
