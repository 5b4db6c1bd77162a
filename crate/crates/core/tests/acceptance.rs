//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any
//! criterion fails.
//!
//! Criteria 2-6 run on SuiteSparse matrices read from
//! `$PBICGSTAB_MATRIX_DIR` (default `data/matrices` at the workspace root)
//! as `<name>.mtx` or `<name>.mtx.gz`. `pbicgstab fetch` downloads them.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use common::*;
use num_bigint::BigInt;
use pbicgstab::repro::{dot, two_prod, two_sum, ReductionMode};
use pbicgstab::solvers::{
    pipelined_bicgstab_observed, true_residual, IterationState, Method, SolveObserver, SolveOutcome,
};
use pbicgstab::sparse::{read_matrix_market_file, CsrMatrix};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PARTITIONS: [usize; 6] = [1, 2, 4, 8, 16, 64];
const RR_SWEEP: [usize; 4] = [10, 20, 50, 100];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn matrix_dir() -> PathBuf {
    std::env::var_os("PBICGSTAB_MATRIX_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/matrices"))
        })
}

fn load(name: &str) -> Result<CsrMatrix, String> {
    let dir = matrix_dir();
    for file in [format!("{name}.mtx"), format!("{name}.mtx.gz")] {
        let path = dir.join(&file);
        if path.exists() {
            return read_matrix_market_file(&path).map_err(|e| format!("{}: {e}", path.display()));
        }
    }
    Err(format!("{name} not found in {}", dir.display()))
}

fn load_all(names: &[&str]) -> Result<Vec<(String, CsrMatrix)>, String> {
    let mut found = Vec::new();
    let mut missing = Vec::new();
    for name in names {
        match load(name) {
            Ok(m) => found.push((name.to_string(), m)),
            Err(e) => missing.push(e),
        }
    }
    if missing.is_empty() {
        Ok(found)
    } else {
        Err(missing.join("; "))
    }
}

/// Outcomes gathered for the soundness check.
#[derive(Default)]
struct Suite {
    runs: Vec<(String, f64, f64)>,
    incomplete: Vec<String>,
}

impl Suite {
    fn solve(
        &mut self,
        label: &str,
        a: &CsrMatrix,
        b: &[f64],
        method: Method,
        tol: f64,
        n: usize,
        rr: Option<usize>,
    ) -> SolveOutcome {
        let cfg = method.config(tol, n, rr).expect("valid configuration");
        let out = method
            .solve(a, b, &vec![0.0; a.nrows()], &cfg)
            .expect("valid inputs");
        self.note(label, a, b, tol, &out);
        out
    }

    fn note(&mut self, label: &str, a: &CsrMatrix, b: &[f64], tol: f64, out: &SolveOutcome) {
        if out.status.is_converged() {
            let t = true_residual(a, &out.x, b, ReductionMode::Sequential).expect("finite");
            self.runs.push((label.to_string(), tol, t));
        }
    }
}

fn ones_rhs(a: &CsrMatrix) -> Vec<f64> {
    a.spmv(&vec![1.0; a.ncols()]).expect("square")
}

fn criterion_1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let mut checked = 0usize;
    let mut failures = Vec::new();
    for v in 0..1000 {
        let len = 10f64.powf(rng.random_range(1.0..5.0)).round() as usize;
        let x = log_uniform_vec(&mut rng, len, -30.0, 30.0);
        let y = log_uniform_vec(&mut rng, len, -30.0, 30.0);
        let expected = oracle_dot(&x, &y).to_bits();
        let mut idx: Vec<usize> = (0..len).collect();
        for _ in 0..20 {
            idx.shuffle(&mut rng);
            let px: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
            let py: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
            for n in PARTITIONS {
                let got = dot(&px, &py, ReductionMode::Reproducible { partitions: n });
                checked += 1;
                if got.map(f64::to_bits) != Ok(expected) {
                    failures.push(format!("vector {v} (len {len}), n={n}"));
                }
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "{checked} dot products, {} differ from the oracle{}",
            failures.len(),
            failures
                .first()
                .map(|f| format!(" (first: {f})"))
                .unwrap_or_default()
        ),
    )
}

fn criterion_2(suite: &mut Suite, matrices: &Result<Vec<(String, CsrMatrix)>, String>) -> Verdict {
    let matrices = match matrices {
        Ok(m) => m,
        Err(e) => return verdict(false, format!("missing matrices: {e}")),
    };
    let mut mismatches = Vec::new();
    let mut cells = Vec::new();
    for (name, a) in matrices {
        let b = ones_rhs(a);
        for tol in [1e-6, 1e-9] {
            let runs: Vec<SolveOutcome> = [1, 8, 16]
                .iter()
                .map(|&n| suite.solve(name, a, &b, Method::PipelinedExact, tol, n, None))
                .collect();
            cells.push(format!(
                "{name}@{tol:e}:{}/{}",
                runs[0].iterations, runs[0].status
            ));
            if !runs.iter().all(|r| r.bitwise_eq(&runs[0])) {
                let counts: Vec<usize> = runs.iter().map(|r| r.iterations).collect();
                mismatches.push(format!("{name}@{tol:e} {counts:?}"));
            }
        }
    }
    verdict(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("identical for n in {{1,8,16}}: {}", cells.join(", "))
        } else {
            format!("differing outcomes: {}", mismatches.join(", "))
        },
    )
}

fn criterion_3(suite: &mut Suite, matrices: &Result<Vec<(String, CsrMatrix)>, String>) -> Verdict {
    let matrices = match matrices {
        Ok(m) => m,
        Err(e) => return verdict(false, format!("missing matrices: {e}")),
    };
    let mut witnesses = Vec::new();
    for (name, a) in matrices {
        let b = ones_rhs(a);
        for tol in [1e-6, 1e-9] {
            let counts: Vec<usize> = [1, 8, 16]
                .iter()
                .map(|&n| {
                    suite
                        .solve(name, a, &b, Method::Pipelined, tol, n, None)
                        .iterations
                })
                .collect();
            if counts.windows(2).any(|w| w[0] != w[1]) {
                witnesses.push(format!("{name}@{tol:e} {counts:?}"));
            }
        }
    }
    verdict(
        !witnesses.is_empty(),
        if witnesses.is_empty() {
            "p-bicgstab iteration counts identical across n everywhere".to_string()
        } else {
            format!("Tree{{1,8,16}} counts differ: {}", witnesses.join(", "))
        },
    )
}

/// Published iteration counts at 1e-6, per method in `Method::ALL` order.
const REFERENCE_COUNTS: [(&str, [usize; 4]); 4] = [
    ("add32", [38, 38, 38, 38]),
    ("saylr4", [28, 28, 28, 28]),
    ("cdde6", [36, 34, 34, 34]),
    ("orsreg_1", [21, 22, 20, 22]),
];

fn criterion_5(suite: &mut Suite) -> Verdict {
    let names: Vec<&str> = REFERENCE_COUNTS.iter().map(|(n, _)| *n).collect();
    let matrices = match load_all(&names) {
        Ok(m) => m,
        Err(e) => return verdict(false, format!("missing matrices: {e}")),
    };
    let bcsstk13 = match load("bcsstk13") {
        Ok(m) => m,
        Err(e) => return verdict(false, format!("missing matrices: {e}")),
    };
    let tol = 1e-6;
    let mut problems = Vec::new();
    let mut cells = Vec::new();
    for ((name, a), (_, expected)) in matrices.iter().zip(REFERENCE_COUNTS) {
        let b = ones_rhs(a);
        for (method, reference) in Method::ALL.into_iter().zip(expected) {
            let outcome = if method == Method::PipelinedReplacement {
                RR_SWEEP
                    .iter()
                    .map(|&k| suite.solve(name, a, &b, method, tol, 1, Some(k)))
                    .filter(|o| o.status.is_converged())
                    .min_by_key(|o| o.iterations)
            } else {
                Some(suite.solve(name, a, &b, method, tol, 1, None))
                    .filter(|o| o.status.is_converged())
            };
            match outcome {
                None => problems.push(format!("{name}/{method} did not converge")),
                Some(o) => {
                    cells.push(format!(
                        "{name}/{method}={} (reference {reference})",
                        o.iterations
                    ));
                    if o.iterations > 2 * reference {
                        problems.push(format!(
                            "{name}/{method}: {} iterations vs reference {reference}",
                            o.iterations
                        ));
                    }
                }
            }
        }
    }
    let b = ones_rhs(&bcsstk13);
    let plain = suite.solve("bcsstk13", &bcsstk13, &b, Method::Pipelined, tol, 1, None);
    let plain_count = if plain.status.is_converged() {
        plain.iterations
    } else {
        usize::MAX
    };
    let best_rr = RR_SWEEP
        .iter()
        .map(|&k| {
            let o = suite.solve(
                "bcsstk13",
                &bcsstk13,
                &b,
                Method::PipelinedReplacement,
                tol,
                1,
                Some(k),
            );
            (k, o)
        })
        .filter(|(_, o)| o.status.is_converged())
        .min_by_key(|(_, o)| o.iterations);
    match &best_rr {
        Some((k, o)) if o.iterations < plain_count => cells.push(format!(
            "bcsstk13: rr(k={k})={} < p-bicgstab={}",
            o.iterations, plain.iterations
        )),
        _ => problems.push(format!(
            "bcsstk13: no rr period beats p-bicgstab ({} iterations, {})",
            plain.iterations, plain.status
        )),
    }
    verdict(
        problems.is_empty(),
        if problems.is_empty() {
            cells.join(", ")
        } else {
            problems.join("; ")
        },
    )
}

struct IdentityCheck<'a> {
    a: &'a CsrMatrix,
    b: &'a [f64],
    events: usize,
    failures: Vec<String>,
}

impl SolveObserver for IdentityCheck<'_> {
    fn on_replacement(&mut self, iteration: usize, st: &IterationState) {
        self.events += 1;
        let ax = self.a.spmv(&st.x).unwrap();
        let r: Vec<f64> = self.b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
        let same = |u: &[f64], v: &[f64]| u.iter().zip(v).all(|(p, q)| p.to_bits() == q.to_bits());
        let checks = [
            ("r = b - Ax", same(&st.r, &r)),
            ("s = Ap", same(&st.s, &self.a.spmv(&st.p).unwrap())),
            ("w = Ar", same(&st.w, &self.a.spmv(&st.r).unwrap())),
            ("z = As", same(&st.z, &self.a.spmv(&st.s).unwrap())),
        ];
        for (name, ok) in checks {
            if !ok {
                self.failures
                    .push(format!("{name} at iteration {iteration}"));
            }
        }
    }
}

fn criterion_6(suite: &mut Suite) -> Verdict {
    let a = match load("bcsstk13") {
        Ok(m) => m,
        Err(e) => return verdict(false, format!("missing matrices: {e}")),
    };
    let b = ones_rhs(&a);
    let tol = 1e-6;
    let cfg = Method::PipelinedReplacement
        .config(tol, 1, Some(50))
        .unwrap();
    let mut check = IdentityCheck {
        a: &a,
        b: &b,
        events: 0,
        failures: Vec::new(),
    };
    let out = pipelined_bicgstab_observed(&a, &b, &vec![0.0; a.nrows()], &cfg, &mut check).unwrap();
    let (events, failures) = (check.events, check.failures);
    suite.note("bcsstk13", &a, &b, tol, &out);
    verdict(
        events > 0 && failures.is_empty(),
        format!(
            "{events} replacements over {} iterations ({}), {} identity failures{}",
            out.iterations,
            out.status,
            failures.len(),
            failures
                .first()
                .map(|f| format!(" (first: {f})"))
                .unwrap_or_default()
        ),
    )
}

fn criterion_7(suite: &mut Suite) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    let tol = 1e-10;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for k in 0..100 {
        let n = rng.random_range(4..=64);
        let a = random_dominant(&mut rng, n, 0.3);
        let x_true: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = a.spmv(&x_true).unwrap();
        let oracle = dense_solve(&to_dense(&a), &b);
        for method in Method::ALL {
            let out = suite.solve(&format!("random#{k}"), &a, &b, method, tol, 4, Some(10));
            let err: Vec<f64> = out.x.iter().zip(&oracle).map(|(x, o)| x - o).collect();
            let rel = norm(&err) / norm(&oracle);
            worst = worst.max(rel);
            if !out.status.is_converged() || !(rel <= 1e-6) {
                failures.push(format!(
                    "system {k} (n={n}) {method}: {} error {rel:e}",
                    out.status
                ));
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!(
            "400 solves, worst relative forward error {worst:e}, {} failures{}",
            failures.len(),
            failures
                .first()
                .map(|f| format!(" (first: {f})"))
                .unwrap_or_default()
        ),
    )
}

/// Random binary64 with a uniformly drawn exponent in `[lo, hi]`.
fn random_float(rng: &mut impl Rng, lo: i32, hi: i32) -> f64 {
    let e = rng.random_range(lo..=hi);
    let mantissa = 1.0 + rng.random_range(0..1u64 << 52) as f64 / (1u64 << 52) as f64;
    let v = mantissa * 2f64.powi(e);
    if rng.random_bool(0.5) {
        -v
    } else {
        v
    }
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
    let mut failures = 0usize;
    for _ in 0..1_000_000 {
        // Sums: anything finite whose rounded sum stays finite.
        let a = random_float(&mut rng, -1000, 1000);
        let b = random_float(&mut rng, -1000, 1000);
        let (s, e) = two_sum(a, b);
        if scaled_value(a) + scaled_value(b) != scaled_value(s) + scaled_value(e) {
            failures += 1;
        }
        // Products: exponents chosen so that the product and its rounding
        // error are representable.
        let ea = rng.random_range(-480..=500);
        let a = random_float(&mut rng, ea, ea);
        let b = random_float(&mut rng, -480, 500);
        match two_prod(a, b) {
            Ok((p, e)) => {
                let exact: BigInt = scaled_product(a, b);
                if exact != scaled_product(p, 1.0) + scaled_product(e, 1.0) {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    verdict(
        failures == 0,
        format!("2000000 transformations (1e6 pairs each for two_sum and two_prod), {failures} failures"),
    )
}

fn criterion_4(suite: &Suite) -> Verdict {
    let violations: Vec<String> = suite
        .runs
        .iter()
        .filter(|(_, tol, t)| !(*t <= 10.0 * tol))
        .map(|(label, tol, t)| format!("{label}@{tol:e}: {t:e}"))
        .collect();
    let complete = suite.incomplete.is_empty();
    let mut detail = format!(
        "{} converged outcomes checked, {} violations",
        suite.runs.len(),
        violations.len()
    );
    if let Some(v) = violations.first() {
        detail += &format!(" (first: {v})");
    }
    if !complete {
        detail += &format!(
            "; suite incomplete, criteria {} did not run",
            suite.incomplete.join(", ")
        );
    }
    verdict(complete && violations.is_empty(), detail)
}

fn main() -> ExitCode {
    let mut suite = Suite::default();
    let mut results: Vec<(usize, &str, Verdict, f64)> = Vec::new();
    let mut run = |id: usize,
                   title: &'static str,
                   f: &mut dyn FnMut(&mut Suite) -> Verdict,
                   suite: &mut Suite| {
        let start = Instant::now();
        let v = f(suite);
        let secs = start.elapsed().as_secs_f64();
        if !v.pass && v.detail.starts_with("missing matrices") {
            suite.incomplete.push(id.to_string());
        }
        println!(
            "criterion {id} {:4} {title}: {} [{secs:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        results.push((id, title, v, secs));
    };

    let partition_set = load_all(&["1138_bus", "add32", "bfwa782", "bcsstk18", "bwm2000"]);
    run(
        1,
        "reproducible dot equals correctly rounded oracle",
        &mut |_| criterion_1(),
        &mut suite,
    );
    run(
        2,
        "p-bicgstab-exblas bitwise identical across n",
        &mut |s| criterion_2(s, &partition_set),
        &mut suite,
    );
    run(
        3,
        "p-bicgstab under Tree{n} changes iteration counts",
        &mut |s| criterion_3(s, &partition_set),
        &mut suite,
    );
    run(5, "reference iteration counts", &mut criterion_5, &mut suite);
    run(
        6,
        "residual replacement identities on bcsstk13",
        &mut criterion_6,
        &mut suite,
    );
    run(
        7,
        "oracle solves of random systems",
        &mut criterion_7,
        &mut suite,
    );
    run(
        8,
        "error-free transformations are exact",
        &mut |_| criterion_8(),
        &mut suite,
    );
    run(
        4,
        "converged outcomes are sound",
        &mut |s| criterion_4(s),
        &mut suite,
    );

    let failed = results.iter().filter(|(_, _, v, _)| !v.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
