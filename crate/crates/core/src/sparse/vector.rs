//! Elementwise vector kernels. Every entry is computed independently, so
//! results do not depend on how rows are distributed.

use std::ops::Deref;

use super::SparseError;

/// A vector of finite binary64 entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self, SparseError> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(SparseError::NonFinite);
        }
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for DenseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = SparseError;

    fn try_from(entries: Vec<f64>) -> Result<Self, SparseError> {
        Self::new(entries)
    }
}

fn same_len(a: &[f64], b: &[f64]) -> Result<(), SparseError> {
    if a.len() != b.len() {
        return Err(SparseError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// `alpha * x + y`.
pub fn axpy(alpha: f64, x: &[f64], y: &[f64]) -> Result<Vec<f64>, SparseError> {
    same_len(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| alpha * a + b).collect())
}

/// `y <- alpha * x + y`.
pub fn axpy_in_place(alpha: f64, x: &[f64], y: &mut [f64]) -> Result<(), SparseError> {
    same_len(x, y)?;
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
    Ok(())
}

pub fn scale(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

pub fn add(x: &[f64], y: &[f64]) -> Result<Vec<f64>, SparseError> {
    same_len(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| a + b).collect())
}

pub fn sub(x: &[f64], y: &[f64]) -> Result<Vec<f64>, SparseError> {
    same_len(x, y)?;
    Ok(x.iter().zip(y).map(|(a, b)| a - b).collect())
}

/// Copies `src` into `dst`.
pub fn copy(src: &[f64], dst: &mut [f64]) -> Result<(), SparseError> {
    same_len(src, dst)?;
    dst.copy_from_slice(src);
    Ok(())
}
