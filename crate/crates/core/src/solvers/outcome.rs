use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BreakdownReason {
    /// `(r0, r_i)` vanished.
    Rho,
    /// The denominator of `alpha` vanished.
    AlphaDenominator,
    /// `(y_i, y_i)` underflowed to zero.
    OmegaDenominator,
    /// `omega` is zero, so `beta = (alpha / omega) ...` is undefined.
    Omega,
    /// A vector or scalar left the finite range.
    NonFinite,
}

impl BreakdownReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            BreakdownReason::Rho => "rho",
            BreakdownReason::AlphaDenominator => "alpha_denominator",
            BreakdownReason::OmegaDenominator => "omega_denominator",
            BreakdownReason::Omega => "omega",
            BreakdownReason::NonFinite => "non_finite",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Converged,
    MaxIterReached,
    Breakdown(BreakdownReason),
}

impl SolveStatus {
    pub fn is_converged(&self) -> bool {
        matches!(self, SolveStatus::Converged)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Converged => f.write_str("converged"),
            SolveStatus::MaxIterReached => f.write_str("max_iter"),
            SolveStatus::Breakdown(reason) => write!(f, "breakdown:{}", reason.as_str()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub iterations: usize,
    pub x: Vec<f64>,
    /// `||r_i|| / ||b||` for `i = 0..=iterations`.
    pub recursive_residual_history: Vec<f64>,
    /// `||b - A x_i|| / ||b||`, when requested.
    pub true_residual_history: Option<Vec<f64>>,
    pub replacements_applied: usize,
}

impl SolveOutcome {
    pub fn final_recursive_residual(&self) -> f64 {
        *self
            .recursive_residual_history
            .last()
            .expect("history always holds iteration 0")
    }

    /// Equality down to the bit pattern of every float.
    pub fn bitwise_eq(&self, other: &SolveOutcome) -> bool {
        fn bits(v: &[f64]) -> impl Iterator<Item = u64> + '_ {
            v.iter().map(|x| x.to_bits())
        }
        fn same(a: &[f64], b: &[f64]) -> bool {
            a.len() == b.len() && bits(a).eq(bits(b))
        }
        self.status == other.status
            && self.iterations == other.iterations
            && self.replacements_applied == other.replacements_applied
            && same(&self.x, &other.x)
            && same(
                &self.recursive_residual_history,
                &other.recursive_residual_history,
            )
            && match (&self.true_residual_history, &other.true_residual_history) {
                (Some(a), Some(b)) => same(a, b),
                (None, None) => true,
                _ => false,
            }
    }
}
