use std::fmt;
use std::str::FromStr;

use crate::repro::ReductionMode;

use super::SolverError;

/// Which vectors a residual replacement recomputes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReplacementScope {
    /// `r, w, s, z` and also `t = A w`, `v = A z`, so every product
    /// relation of the pipelined recurrences holds after the reset.
    #[default]
    Full,
    /// Only `r, w, s, z`.
    Strict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Relative residual tolerance `||r|| / ||b||`.
    pub tol: f64,
    pub max_iter: usize,
    /// How every dot product and norm is reduced.
    pub mode: ReductionMode,
    /// Residual replacement every `k` iterations (pipelined solver only).
    pub rr_period: Option<usize>,
    pub rr_scope: ReplacementScope,
    /// Relative threshold below which a scalar denominator counts as zero.
    pub breakdown_eps: f64,
    /// Also record `||b - A x_i|| / ||b||` at every iteration.
    pub record_true_residual: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 10_000,
            mode: ReductionMode::Sequential,
            rr_period: None,
            rr_scope: ReplacementScope::Full,
            breakdown_eps: 1e-30,
            record_true_residual: false,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |msg: &str| Err(SolverError::InvalidConfig(msg.to_string()));
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return bad("tol must be a positive finite number");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        if self.rr_period == Some(0) {
            return bad("rr_period must be at least 1");
        }
        if !(self.breakdown_eps >= 0.0) {
            return bad("breakdown_eps must be non-negative");
        }
        if self.mode.partitions() == 0 {
            return bad("reduction partitions must be at least 1");
        }
        Ok(())
    }
}

/// The four solver variants compared by the benchmark harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    BiCgStab,
    Pipelined,
    PipelinedExact,
    PipelinedReplacement,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::BiCgStab,
        Method::Pipelined,
        Method::PipelinedExact,
        Method::PipelinedReplacement,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::BiCgStab => "bicgstab",
            Method::Pipelined => "p-bicgstab",
            Method::PipelinedExact => "p-bicgstab-exblas",
            Method::PipelinedReplacement => "p-bicgstab-rr",
        }
    }

    pub fn is_pipelined(&self) -> bool {
        !matches!(self, Method::BiCgStab)
    }

    /// Reduction strategy over `partitions` simulated processes. Only the
    /// exact variant is independent of `partitions`.
    pub fn mode(&self, partitions: usize) -> ReductionMode {
        match self {
            Method::PipelinedExact => ReductionMode::Reproducible { partitions },
            _ => ReductionMode::Tree { partitions },
        }
    }

    /// Solver configuration for this method. The replacement variant
    /// requires `rr_period`; the others ignore it.
    pub fn config(
        &self,
        tol: f64,
        partitions: usize,
        rr_period: Option<usize>,
    ) -> Result<SolverConfig, SolverError> {
        let rr_period = match self {
            Method::PipelinedReplacement => Some(rr_period.ok_or_else(|| {
                SolverError::InvalidConfig("p-bicgstab-rr requires an rr_period".into())
            })?),
            _ => None,
        };
        let cfg = SolverConfig {
            tol,
            mode: self.mode(partitions),
            rr_period,
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| SolverError::InvalidConfig(format!("unknown method '{s}'")))
    }
}
