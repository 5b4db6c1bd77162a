//! Sparse matrices, Matrix Market I/O, SpMV and vector kernels.

mod csr;
pub mod market;
mod partition;
pub mod vector;

use thiserror::Error;

pub use csr::CsrMatrix;
pub use market::{parse_matrix_market, read_matrix_market_file, write_matrix_market, MarketError};
pub use partition::{partition_rows, RowPartition};
pub use vector::{axpy, axpy_in_place, DenseVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SparseError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),
    #[error("non-finite value")]
    NonFinite,
    #[error("cannot split {nrows} rows into {parts} partitions")]
    InvalidPartition { nrows: usize, parts: usize },
}
