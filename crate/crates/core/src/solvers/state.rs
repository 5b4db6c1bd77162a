use crate::repro::{norm2, ReductionMode};
use crate::sparse::CsrMatrix;

use super::config::ReplacementScope;
use super::SolverError;

/// Every vector and scalar carried between iterations.
///
/// In the pipelined solver `w`, `s`, `z`, `t` and `v` track `A r`, `A p`,
/// `A s`, `A w` and `A z` through recurrences rather than explicit
/// products. Classic BiCGStab only uses `r0_hat, r, p, q, x, s, y`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub r0_hat: Vec<f64>,
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub s: Vec<f64>,
    pub z: Vec<f64>,
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub y: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub omega: f64,
    /// `(r0_hat, r)`
    pub rho: f64,
    pub replacements: usize,
}

impl IterationState {
    pub fn new(x0: &[f64]) -> Self {
        let n = x0.len();
        let zeros = || vec![0.0; n];
        Self {
            r0_hat: zeros(),
            r: zeros(),
            p: zeros(),
            q: zeros(),
            x: x0.to_vec(),
            w: zeros(),
            s: zeros(),
            z: zeros(),
            t: zeros(),
            v: zeros(),
            y: zeros(),
            alpha: 0.0,
            beta: 0.0,
            omega: 0.0,
            rho: 0.0,
            replacements: 0,
        }
    }
}

/// `out = b - A x`, the single definition shared by the solvers, residual
/// replacement and [`true_residual`].
pub(crate) fn explicit_residual(
    a: &CsrMatrix,
    x: &[f64],
    b: &[f64],
    out: &mut [f64],
) -> Result<(), SolverError> {
    a.spmv_into(x, out)?;
    for (o, bi) in out.iter_mut().zip(b) {
        *o = bi - *o;
    }
    Ok(())
}

/// Resets the recursively updated vectors to their definitions:
/// `r = b - A x`, `w = A r`, `s = A p`, `z = A s`, and with
/// [`ReplacementScope::Full`] also `t = A w`, `v = A z`. Scalars are left
/// alone.
pub fn residual_replace(
    state: &mut IterationState,
    a: &CsrMatrix,
    b: &[f64],
    scope: ReplacementScope,
) -> Result<(), SolverError> {
    explicit_residual(a, &state.x, b, &mut state.r)?;
    a.spmv_into(&state.r, &mut state.w)?;
    a.spmv_into(&state.p, &mut state.s)?;
    a.spmv_into(&state.s, &mut state.z)?;
    if scope == ReplacementScope::Full {
        a.spmv_into(&state.w, &mut state.t)?;
        a.spmv_into(&state.z, &mut state.v)?;
    }
    state.replacements += 1;
    Ok(())
}

/// `||b - A x|| / ||b||` with both norms reduced under `mode`.
pub fn true_residual(
    a: &CsrMatrix,
    x: &[f64],
    b: &[f64],
    mode: ReductionMode,
) -> Result<f64, SolverError> {
    if a.nrows() != b.len() {
        return Err(SolverError::Dimension(
            crate::sparse::SparseError::DimensionMismatch {
                expected: a.nrows(),
                found: b.len(),
            },
        ));
    }
    let bnorm = norm2(b, mode)?;
    if bnorm == 0.0 {
        return Err(SolverError::ZeroRhs);
    }
    let mut r = vec![0.0; b.len()];
    explicit_residual(a, x, b, &mut r)?;
    Ok(norm2(&r, mode)? / bnorm)
}
