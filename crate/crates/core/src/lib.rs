//! Reversible Margolus cellular automata on finite tori.
//!
//! The crate covers classical block-permutation dynamics, the question of
//! which maps on a target region a "program" written into the rest of the
//! lattice can implement, the density-level (macroscopic) description of such
//! programs, and small dense quantum analogues of all of these.

pub mod engine;
pub mod error;
pub mod lattice;
pub mod macroscopic;
pub mod quantum;
pub mod rules;
pub mod universality;

pub use error::{Error, ParseError, Result};

/// Version string embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
