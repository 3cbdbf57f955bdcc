//! Conditional-independence machinery for Markov networks.
//!
//! The crate covers the symbolic side (graphs, maximal independent sets,
//! conditional-independence statements, graphoid axioms), exact numeric
//! checking against joint distributions built from clique potentials,
//! log-linear model fitting for contingency tables, and Gaussian
//! conditional-independence tests.
//!
#![doc = include_str!("../../../README.md")]

pub mod chisq;
pub mod ci;
pub mod error;
pub(crate) mod exec;
pub mod gaussian;
pub mod graph;
pub mod io;
pub mod joint;
pub mod loglinear;
pub mod verify;

pub use error::{Error, ErrorKind, Result};
pub use graph::{Decomposition, UndirectedGraph, VertexSet};
