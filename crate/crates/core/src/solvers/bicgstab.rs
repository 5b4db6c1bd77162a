//! Classic BiCGStab (van der Vorst) with the shadow residual fixed to `r0`.

use crate::sparse::CsrMatrix;

use super::common::{check_inputs, negligible, reduce, NoObserver, Recorder, SolveObserver};
use super::outcome::{BreakdownReason, SolveOutcome, SolveStatus};
use super::state::{explicit_residual, IterationState};
use super::{SolverConfig, SolverError};

pub fn bicgstab(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveOutcome, SolverError> {
    bicgstab_observed(a, b, x0, cfg, &mut NoObserver)
}

pub fn bicgstab_observed(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    cfg: &SolverConfig,
    observer: &mut impl SolveObserver,
) -> Result<SolveOutcome, SolverError> {
    let bnorm = check_inputs(a, b, x0, cfg)?;
    let mode = cfg.mode;
    let eps = cfg.breakdown_eps;
    let mut rec = Recorder::new(a, b, bnorm, cfg);
    let mut st = IterationState::new(x0);

    explicit_residual(a, &st.x, b, &mut st.r)?;
    st.r0_hat.copy_from_slice(&st.r);
    st.p.copy_from_slice(&st.r);

    macro_rules! bail {
        ($reason:expr, $iters:expr) => {
            return Ok(rec.finish(SolveStatus::Breakdown($reason), $iters, st))
        };
    }
    macro_rules! reduce_or_bail {
        ($pairs:expr, $iters:expr) => {
            match reduce(mode, $pairs) {
                Ok(v) => v,
                Err(reason) => bail!(reason, $iters),
            }
        };
    }

    let [rho, rr, r0r0] = reduce_or_bail!(
        [
            (&st.r0_hat, &st.r),
            (&st.r, &st.r),
            (&st.r0_hat, &st.r0_hat)
        ],
        0
    );
    st.rho = rho;
    let r0norm = r0r0.sqrt();
    let mut rnorm = rr.sqrt();
    if rec.push(rnorm, &st.x)? <= cfg.tol {
        return Ok(rec.finish(SolveStatus::Converged, 0, st));
    }
    if negligible(st.rho, r0norm * rnorm, eps) {
        bail!(BreakdownReason::Rho, 0);
    }

    for i in 0..cfg.max_iter {
        a.spmv_into(&st.p, &mut st.s)?;
        let [sigma] = reduce_or_bail!([(&st.r0_hat, &st.s)], i);
        if negligible(sigma, r0norm * rnorm, eps) {
            bail!(BreakdownReason::AlphaDenominator, i);
        }
        st.alpha = st.rho / sigma;
        let alpha = st.alpha;
        for ((q, r), s) in st.q.iter_mut().zip(&st.r).zip(&st.s) {
            *q = r - alpha * s;
        }

        let [qq] = reduce_or_bail!([(&st.q, &st.q)], i);
        let qnorm = qq.sqrt();
        if qnorm / bnorm <= cfg.tol {
            // Half-step exit: x_{i+1} = x_i + alpha p_i, r_{i+1} = q_i.
            for (x, p) in st.x.iter_mut().zip(&st.p) {
                *x += alpha * p;
            }
            st.r.copy_from_slice(&st.q);
            rec.push(qnorm, &st.x)?;
            observer.on_iteration(i + 1, &st);
            return Ok(rec.finish(SolveStatus::Converged, i + 1, st));
        }

        a.spmv_into(&st.q, &mut st.y)?;
        let [qy, yy] = reduce_or_bail!([(&st.q, &st.y), (&st.y, &st.y)], i);
        if yy == 0.0 {
            bail!(BreakdownReason::OmegaDenominator, i);
        }
        st.omega = qy / yy;
        let omega = st.omega;
        if omega == 0.0 || !omega.is_finite() {
            bail!(BreakdownReason::Omega, i);
        }

        for ((x, p), q) in st.x.iter_mut().zip(&st.p).zip(&st.q) {
            *x = *x + alpha * p + omega * q;
        }
        for ((r, q), y) in st.r.iter_mut().zip(&st.q).zip(&st.y) {
            *r = q - omega * y;
        }

        let [rr, rho_next] = reduce_or_bail!([(&st.r, &st.r), (&st.r0_hat, &st.r)], i + 1);
        rnorm = rr.sqrt();
        let rel = rec.push(rnorm, &st.x)?;
        observer.on_iteration(i + 1, &st);
        if rel <= cfg.tol {
            return Ok(rec.finish(SolveStatus::Converged, i + 1, st));
        }
        if negligible(rho_next, r0norm * rnorm, eps) {
            bail!(BreakdownReason::Rho, i + 1);
        }

        st.beta = (alpha / omega) * (rho_next / st.rho);
        st.rho = rho_next;
        let beta = st.beta;
        if !beta.is_finite() {
            bail!(BreakdownReason::NonFinite, i + 1);
        }
        for ((p, r), s) in st.p.iter_mut().zip(&st.r).zip(&st.s) {
            *p = r + beta * (*p - omega * s);
        }
    }

    let iterations = cfg.max_iter;
    Ok(rec.finish(SolveStatus::MaxIterReached, iterations, st))
}
