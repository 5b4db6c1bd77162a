//! Sparse BiCGStab solvers with pluggable reduction strategies.
//!
//! * [`repro`]: error-free transformations, floating-point expansions and a
//!   long accumulator giving correctly rounded, partition-independent dot
//!   products.
//! * [`sparse`]: CSR storage, Matrix Market ingestion, SpMV and vector
//!   kernels.
//! * [`solvers`]: classic BiCGStab and the pipelined variant, optionally
//!   with periodic residual replacement.

pub mod repro;
pub mod solvers;
pub mod sparse;
