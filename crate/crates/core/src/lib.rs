//! Memoryless innovation representations of stochastic processes.
//!
//! The crate covers three regimes:
//!
//! - [`continuous`]: exact innovation via CDF shaping (probability integral
//!   transform with randomized atom splitting) and its exact inverse.
//! - [`lossy`]: closed-form maximal mutual information between a binary
//!   Markov process and a memoryless binary innovation.
//! - [`mec`]: lossless discrete innovation, i.e. minimum entropy coupling of a
//!   set of marginals (greedy, exhaustive vertex search, and a box-relaxation
//!   lower bound).
//!
//! On top of the lossless machinery, [`causal`] decides causal direction from
//! categorical data and [`ikea`] designs rectangular storage units whose
//! compartments partition into equal columns.
//!
//! Search-heavy routines run on rayon when the `parallel` feature is enabled
//! (the default); see [`parallel::Execution`].

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod causal;
pub mod config;
pub mod continuous;
pub mod diagnostics;
pub mod dist;
pub mod error;
pub mod ikea;
pub mod lossy;
pub mod mec;
pub mod parallel;

pub use config::SearchConfig;
pub use dist::{binary_entropy, entropy, mutual_information, Entropy, Pmf, RngSeed};
pub use error::{Error, Result};
pub use mec::{Coupling, MarginalSet};
pub use parallel::Execution;
