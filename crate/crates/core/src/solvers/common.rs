//! Pieces shared by both solvers: input checks, reductions that turn
//! non-finite data into a breakdown, and history bookkeeping.

use crate::repro::{dot_batch, ReductionMode};
use crate::sparse::{CsrMatrix, SparseError};

use super::outcome::{BreakdownReason, SolveOutcome, SolveStatus};
use super::state::{true_residual, IterationState};
use super::{SolverConfig, SolverError};

/// Absolute floor under every relative breakdown threshold.
pub(crate) const ABSOLUTE_FLOOR: f64 = 1e-300;

/// Hooks called while a solve runs. All methods default to no-ops.
pub trait SolveObserver {
    /// After iteration `iteration` (1-based) has updated `x` and `r`.
    fn on_iteration(&mut self, _iteration: usize, _state: &IterationState) {}
    /// Right after a residual replacement during iteration `iteration`.
    fn on_replacement(&mut self, _iteration: usize, _state: &IterationState) {}
}

/// Observer that ignores everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoObserver;

impl SolveObserver for NoObserver {}

pub(crate) fn check_inputs(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<f64, SolverError> {
    cfg.validate()?;
    if !a.is_square() {
        return Err(SolverError::NotSquare {
            nrows: a.nrows(),
            ncols: a.ncols(),
        });
    }
    for len in [b.len(), x0.len()] {
        if len != a.nrows() {
            return Err(SparseError::DimensionMismatch {
                expected: a.nrows(),
                found: len,
            }
            .into());
        }
    }
    if b.iter().chain(x0).any(|v| !v.is_finite()) {
        return Err(SolverError::NonFiniteInput);
    }
    let bnorm = crate::repro::norm2(b, cfg.mode)?;
    if bnorm == 0.0 {
        return Err(SolverError::ZeroRhs);
    }
    Ok(bnorm)
}

/// One reduction phase under `mode`; any non-finite operand or result is
/// reported as a breakdown rather than an error.
pub(crate) fn reduce<const N: usize>(
    mode: ReductionMode,
    pairs: [(&[f64], &[f64]); N],
) -> Result<[f64; N], BreakdownReason> {
    let values = dot_batch(&pairs, mode).map_err(|_| BreakdownReason::NonFinite)?;
    let mut out = [0.0; N];
    out.copy_from_slice(&values);
    Ok(out)
}

/// `|value| <= max(eps * scale, floor)`.
pub(crate) fn negligible(value: f64, scale: f64, eps: f64) -> bool {
    value.abs() <= (eps * scale).max(ABSOLUTE_FLOOR)
}

pub(crate) struct Recorder<'a> {
    a: &'a CsrMatrix,
    b: &'a [f64],
    bnorm: f64,
    mode: ReductionMode,
    recursive: Vec<f64>,
    true_hist: Option<Vec<f64>>,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(a: &'a CsrMatrix, b: &'a [f64], bnorm: f64, cfg: &SolverConfig) -> Self {
        Self {
            a,
            b,
            bnorm,
            mode: cfg.mode,
            recursive: Vec::new(),
            true_hist: cfg.record_true_residual.then(Vec::new),
        }
    }

    /// Records `||r|| / ||b||` (and the true residual of `x`); returns the
    /// relative recursive residual.
    pub(crate) fn push(&mut self, rnorm: f64, x: &[f64]) -> Result<f64, SolverError> {
        let rel = rnorm / self.bnorm;
        self.recursive.push(rel);
        if let Some(hist) = self.true_hist.as_mut() {
            let value = match true_residual(self.a, x, self.b, self.mode) {
                Ok(v) => v,
                Err(SolverError::Reduction(_)) => f64::NAN,
                Err(e) => return Err(e),
            };
            hist.push(value);
        }
        Ok(rel)
    }

    pub(crate) fn finish(
        self,
        status: SolveStatus,
        iterations: usize,
        state: IterationState,
    ) -> SolveOutcome {
        debug_assert_eq!(self.recursive.len(), iterations + 1);
        SolveOutcome {
            status,
            iterations,
            x: state.x,
            recursive_residual_history: self.recursive,
            true_residual_history: self.true_hist,
            replacements_applied: state.replacements,
        }
    }
}
