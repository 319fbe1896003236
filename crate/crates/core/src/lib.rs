//! Classifier ensemble selection and fusion with evolutionary search.
//!
//! The crate covers the algorithmic side of the pipeline: bootstrapped base
//! classifier pools, hit/miss contingency statistics, five pairwise diversity
//! measures, rank-aggregation ("tuning") population initialization, the three
//! minimized fitness functions, a genetic algorithm and UMDA with margins,
//! majority voting, the Kappa pruning and bagging baselines, and the
//! Wilcoxon signed-rank test used to compare methods.
//!
//! Everything here is `no_std` + `alloc` and free of IO. Parallelism is
//! injected through [`exec::Executor`]; every random stream is derived from
//! an explicit seed with [`rng::derive_seed`], so serial and parallel runs
//! produce identical results.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod dataset;
pub mod diversity;
pub mod error;
pub mod evolve;
pub mod exec;
pub mod fitness;
pub mod init;
pub mod learners;
pub mod mask;
pub mod matrix;
pub mod predictions;
pub mod protocol;
pub mod rng;
pub mod stats;
pub mod vote;

pub use error::{Error, Result};
pub use mask::EnsembleMask;
pub use matrix::Matrix;
