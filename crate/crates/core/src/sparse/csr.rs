use super::partition::RowPartition;
use super::SparseError;

/// Compressed sparse row matrix with sorted, duplicate-free rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from raw CSR arrays, checking every structural
    /// invariant.
    pub fn from_raw_parts(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, SparseError> {
        let invalid = |msg: String| Err(SparseError::InvalidStructure(msg));
        if row_offsets.len() != nrows + 1 {
            return invalid(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                nrows + 1
            ));
        }
        if row_offsets[0] != 0 {
            return invalid("row_offsets[0] must be 0".into());
        }
        if col_indices.len() != values.len() || row_offsets[nrows] != values.len() {
            return invalid(format!(
                "nnz mismatch: offsets end at {}, {} column indices, {} values",
                row_offsets[nrows],
                col_indices.len(),
                values.len()
            ));
        }
        for row in 0..nrows {
            let (start, end) = (row_offsets[row], row_offsets[row + 1]);
            if start > end {
                return invalid(format!("row_offsets decrease at row {row}"));
            }
            let cols = &col_indices[start..end];
            if let Some(&c) = cols.iter().find(|&&c| c >= ncols) {
                return invalid(format!("column {c} out of range in row {row}"));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return invalid(format!("columns not strictly increasing in row {row}"));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SparseError::NonFinite);
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Assembles a matrix from 0-based `(row, col, value)` triplets.
    /// Repeated coordinates are summed in the order given.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, SparseError> {
        for &(r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(SparseError::InvalidStructure(format!(
                    "entry ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
            if !v.is_finite() {
                return Err(SparseError::NonFinite);
            }
        }
        let mut counts = vec![0usize; nrows + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        // Bucket by row keeping input order, then stable-sort each row by column.
        let mut next = counts.clone();
        let mut bucketed = vec![(0usize, 0.0f64); triplets.len()];
        for &(r, c, v) in triplets {
            bucketed[next[r]] = (c, v);
            next[r] += 1;
        }

        let mut row_offsets = Vec::with_capacity(nrows + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        for r in 0..nrows {
            let row = &mut bucketed[counts[r]..counts[r + 1]];
            row.sort_by_key(|&(c, _)| c);
            for &(c, v) in row.iter() {
                if col_indices.len() > row_offsets[r] && *col_indices.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(c);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self::from_raw_parts(nrows, ncols, row_offsets, col_indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Diagonal matrix with the given entries (zeros are stored explicitly).
    pub fn from_diagonal(diagonal: &[f64]) -> Result<Self, SparseError> {
        let n = diagonal.len();
        Self::from_raw_parts(n, n, (0..=n).collect(), (0..n).collect(), diagonal.to_vec())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of one row.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|k| vals[k])
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.ncols, self.nrows, &triplets)
            .expect("transpose of a valid matrix is valid")
    }

    /// `y = A x`. Each row is summed left to right over its stored entries.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>, SparseError> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<(), SparseError> {
        self.check_spmv_dims(x, y)?;
        self.spmv_rows(x, y, 0..self.nrows);
        Ok(())
    }

    /// SpMV with rows distributed over a simulated process layout. Every
    /// row is owned by one range and accumulated in the same order, so the
    /// result is bitwise identical to [`CsrMatrix::spmv`].
    pub fn spmv_partitioned(
        &self,
        x: &[f64],
        partition: &RowPartition,
    ) -> Result<Vec<f64>, SparseError> {
        if partition.nrows() != self.nrows {
            return Err(SparseError::DimensionMismatch {
                expected: self.nrows,
                found: partition.nrows(),
            });
        }
        let mut y = vec![0.0; self.nrows];
        self.check_spmv_dims(x, &y)?;
        for range in partition.ranges() {
            self.spmv_rows(x, &mut y, range.clone());
        }
        Ok(y)
    }

    fn check_spmv_dims(&self, x: &[f64], y: &[f64]) -> Result<(), SparseError> {
        if x.len() != self.ncols {
            return Err(SparseError::DimensionMismatch {
                expected: self.ncols,
                found: x.len(),
            });
        }
        if y.len() != self.nrows {
            return Err(SparseError::DimensionMismatch {
                expected: self.nrows,
                found: y.len(),
            });
        }
        Ok(())
    }

    #[inline]
    fn spmv_rows(&self, x: &[f64], y: &mut [f64], rows: std::ops::Range<usize>) {
        for i in rows {
            let start = self.row_offsets[i];
            let end = self.row_offsets[i + 1];
            let mut acc = 0.0;
            for k in start..end {
                acc += self.values[k] * x[self.col_indices[k]];
            }
            y[i] = acc;
        }
    }
}
