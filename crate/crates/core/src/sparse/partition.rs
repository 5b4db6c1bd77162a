use std::ops::Range;

use super::SparseError;

/// Contiguous, balanced row blocks standing in for the rows owned by each
/// process of a distributed run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowPartition {
    nrows: usize,
    ranges: Vec<Range<usize>>,
}

impl RowPartition {
    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }
}

/// Splits `0..nrows` into `n` contiguous ranges whose sizes differ by at
/// most one; the larger blocks come first.
pub fn partition_rows(nrows: usize, n: usize) -> Result<RowPartition, SparseError> {
    if n == 0 || n > nrows {
        return Err(SparseError::InvalidPartition { nrows, parts: n });
    }
    let ranges = crate::repro::block_ranges(nrows, n).collect();
    Ok(RowPartition { nrows, ranges })
}
