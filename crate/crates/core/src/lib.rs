//! Seed-guided constrained non-negative matrix factorization for discovering
//! low-prevalence ("minority") topics, with a synthetic injection benchmark
//! and minority-focused evaluation metrics.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error;
pub mod cli;
pub mod eval;
pub mod io;
pub mod rng;
pub mod solver;
pub mod synth;
pub mod sparse;

pub use error::{Error, Result};
