//! Datasets on disk, a parallel executor, the cross-validated experiment
//! harness and report formats for evolutionary ensemble selection.

pub mod config;
pub mod exec;
pub mod harness;
pub mod io;
pub mod poolfile;
pub mod report;

pub use cife_core as core;
