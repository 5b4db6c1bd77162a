//! Pipelined BiCGStab (Cools and Vanroose).
//!
//! Each iteration needs one SpMV for `v = A z` and one for `t = A w`, and
//! groups its dot products into two batched reduction phases:
//!
//! * phase A: `(q, y)`, `(y, y)`, `(q, q)`, which give `omega`;
//! * phase B: `(r0, r)`, `(r0, w)`, `(r0, s)`, `(r0, z)`, `(r, r)`, which
//!   give `beta` and the next `alpha`.
//!
//! When residual replacement is enabled it runs after the `x, r, w, t`
//! updates of every `k`-th iteration and before phase B, so the next
//! `alpha` is computed from the replaced vectors.

use crate::sparse::CsrMatrix;

use super::common::{check_inputs, negligible, reduce, NoObserver, Recorder, SolveObserver};
use super::outcome::{BreakdownReason, SolveOutcome, SolveStatus};
use super::state::{explicit_residual, residual_replace, IterationState};
use super::{SolverConfig, SolverError};

pub fn pipelined_bicgstab(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveOutcome, SolverError> {
    pipelined_bicgstab_observed(a, b, x0, cfg, &mut NoObserver)
}

pub fn pipelined_bicgstab_observed(
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
    a.spmv_into(&st.r, &mut st.w)?;
    a.spmv_into(&st.w, &mut st.t)?;

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

    let [rho, rr, r0r0, r0w] = reduce_or_bail!(
        [
            (&st.r0_hat, &st.r),
            (&st.r, &st.r),
            (&st.r0_hat, &st.r0_hat),
            (&st.r0_hat, &st.w),
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
    if negligible(r0w, r0norm * rnorm, eps) {
        bail!(BreakdownReason::AlphaDenominator, 0);
    }
    st.alpha = st.rho / r0w;

    for i in 0..cfg.max_iter {
        if i == 0 {
            st.p.copy_from_slice(&st.r);
            st.s.copy_from_slice(&st.w);
            st.z.copy_from_slice(&st.t);
        } else {
            let (beta, omega) = (st.beta, st.omega);
            for ((p, r), s) in st.p.iter_mut().zip(&st.r).zip(&st.s) {
                *p = r + beta * (*p - omega * s);
            }
            for ((s, w), z) in st.s.iter_mut().zip(&st.w).zip(&st.z) {
                *s = w + beta * (*s - omega * z);
            }
            for ((z, t), v) in st.z.iter_mut().zip(&st.t).zip(&st.v) {
                *z = t + beta * (*z - omega * v);
            }
        }

        let alpha = st.alpha;
        for ((q, r), s) in st.q.iter_mut().zip(&st.r).zip(&st.s) {
            *q = r - alpha * s;
        }
        for ((y, w), z) in st.y.iter_mut().zip(&st.w).zip(&st.z) {
            *y = w - alpha * z;
        }
        a.spmv_into(&st.z, &mut st.v)?;

        let [qy, yy, qq] = reduce_or_bail!([(&st.q, &st.y), (&st.y, &st.y), (&st.q, &st.q)], i);
        let qnorm = qq.sqrt();
        if qnorm / bnorm <= cfg.tol {
            for (x, p) in st.x.iter_mut().zip(&st.p) {
                *x += alpha * p;
            }
            st.r.copy_from_slice(&st.q);
            rec.push(qnorm, &st.x)?;
            observer.on_iteration(i + 1, &st);
            return Ok(rec.finish(SolveStatus::Converged, i + 1, st));
        }
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
        for (((w, y), t), v) in st.w.iter_mut().zip(&st.y).zip(&st.t).zip(&st.v) {
            *w = y - omega * (t - alpha * v);
        }
        a.spmv_into(&st.w, &mut st.t)?;

        if let Some(k) = cfg.rr_period {
            if (i + 1) % k == 0 {
                residual_replace(&mut st, a, b, cfg.rr_scope)?;
                observer.on_replacement(i + 1, &st);
            }
        }

        let [rho_next, r0w, r0s, r0z, rr] = reduce_or_bail!(
            [
                (&st.r0_hat, &st.r),
                (&st.r0_hat, &st.w),
                (&st.r0_hat, &st.s),
                (&st.r0_hat, &st.z),
                (&st.r, &st.r),
            ],
            i + 1
        );
        rnorm = rr.sqrt();
        let rel = rec.push(rnorm, &st.x)?;
        observer.on_iteration(i + 1, &st);
        if rel <= cfg.tol {
            return Ok(rec.finish(SolveStatus::Converged, i + 1, st));
        }
        if negligible(rho_next, r0norm * rnorm, eps) {
            bail!(BreakdownReason::Rho, i + 1);
        }

        let beta = (alpha / omega) * (rho_next / st.rho);
        if !beta.is_finite() {
            bail!(BreakdownReason::NonFinite, i + 1);
        }
        let denom = r0w + beta * r0s - beta * omega * r0z;
        if negligible(denom, r0norm * rnorm, eps) {
            bail!(BreakdownReason::AlphaDenominator, i + 1);
        }
        st.beta = beta;
        st.rho = rho_next;
        st.alpha = rho_next / denom;
    }

    let iterations = cfg.max_iter;
    Ok(rec.finish(SolveStatus::MaxIterReached, iterations, st))
}
