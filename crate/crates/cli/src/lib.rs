//! Experiment harness for the `pbicgstab` solvers.
//!
//! The `pbicgstab` binary wraps these modules: single solves, method and
//! tolerance sweeps, partition sweeps, residual histories and downloads
//! from the SuiteSparse Matrix Collection.

pub mod cli;
pub mod commands;
pub mod experiment;
pub mod fetch;
pub mod record;
