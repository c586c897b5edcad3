//! First-passage percolation laboratory.
//!
//! The crate is organised bottom-up: [`lattice`] holds boxes, edge laws and
//! weight configurations; [`passage`] computes passage times on the lattice
//! and between arbitrary real points; [`geometry`] provides convex windows;
//! [`metric`] stores discretised metrics and the operations used to build
//! new ones; [`path_tools`] discretises curves into lattice paths; [`ld`]
//! estimates large-deviation probabilities; [`rate`] evaluates rate
//! functionals built from elementary costs.
//!
//! Heavy loops (Monte Carlo trials, metric rows, enumeration chunks) go
//! through [`par`], which runs on rayon when the `parallel` feature is on and
//! falls back to plain iteration otherwise. Results never depend on the
//! execution mode or the thread count.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod geometry;
pub mod lattice;
pub mod ld;
pub mod metric;
pub mod par;
pub mod passage;
pub mod path_tools;
pub mod rate;
pub mod rng;
pub mod stats;
mod util;

pub use error::{FppError, Result};
