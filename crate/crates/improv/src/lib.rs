//! File formats, command-line tools and the HTTP chat service built on
//! [`improv_core`].

pub mod commands;
pub mod config;
pub mod error;
pub mod jsonl;
pub mod server;
pub mod store;

pub use error::{ImprovError, Result};
