//! Exact, order-independent summation and dot products, plus the plain
//! floating-point reductions they are compared against.

mod eft;
mod expansion;
mod reduce;
mod superacc;

use thiserror::Error;

pub use eft::{two_prod, two_sum};
pub use expansion::{FloatExpansion, MAX_TERMS, MIN_TERMS};
pub use reduce::{
    block_ranges, dot, dot_batch, norm2, reproducible_dot, sum, ExactAccumulator, ReductionMode,
};
pub use superacc::{AccStatus, Superaccumulator, DIGIT_BITS, MIN_EXPONENT, NUM_DIGITS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReproError {
    #[error("non-finite input (NaN or infinity)")]
    NonFinite,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("product overflow")]
    ProductOverflow,
    #[error("product underflow: rounding error is below the subnormal range")]
    ProductUnderflow,
    #[error("accumulator overflow")]
    AccumulatorOverflow,
    #[error("result exceeds the binary64 range")]
    ResultOverflow,
    #[error("partition count must be at least 1")]
    InvalidPartitions,
    #[error("expansion capacity {0} outside 2..=8")]
    InvalidCapacity(usize),
}
