//! BiCGStab and pipelined BiCGStab with injectable reductions.

mod bicgstab;
mod common;
mod config;
mod outcome;
mod pipelined;
mod state;

use thiserror::Error;

use crate::repro::ReproError;
use crate::sparse::{CsrMatrix, SparseError};

pub use bicgstab::{bicgstab, bicgstab_observed};
pub use common::{NoObserver, SolveObserver};
pub use config::{Method, ReplacementScope, SolverConfig};
pub use outcome::{BreakdownReason, SolveOutcome, SolveStatus};
pub use pipelined::{pipelined_bicgstab, pipelined_bicgstab_observed};
pub use state::{residual_replace, true_residual, IterationState};

/// Invalid inputs. Numerical failures during a run are reported through
/// [`SolveStatus`] instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix is not square ({nrows}x{ncols})")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("right-hand side or initial guess contains NaN or infinity")]
    NonFiniteInput,
    #[error("right-hand side is zero")]
    ZeroRhs,
    #[error(transparent)]
    Dimension(#[from] SparseError),
    #[error(transparent)]
    Reduction(#[from] ReproError),
}

impl Method {
    /// Runs this method with `cfg`. Classic BiCGStab ignores `rr_period`.
    pub fn solve(
        &self,
        a: &CsrMatrix,
        b: &[f64],
        x0: &[f64],
        cfg: &SolverConfig,
    ) -> Result<SolveOutcome, SolverError> {
        match self {
            Method::BiCgStab => bicgstab(a, b, x0, cfg),
            _ => pipelined_bicgstab(a, b, x0, cfg),
        }
    }
}
