//! What to run: matrix, method, tolerance, partitions and right-hand side.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use pbicgstab::repro::ReductionMode;
use pbicgstab::solvers::{true_residual, Method, SolveOutcome, SolverConfig};
use pbicgstab::sparse::{read_matrix_market_file, CsrMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Environment variable naming the directory bare matrix names resolve in.
pub const MATRIX_DIR_ENV: &str = "PBICGSTAB_MATRIX_DIR";
pub const DEFAULT_MATRIX_DIR: &str = "data/matrices";

/// Residual replacement periods tried when none is given.
pub const RR_SWEEP: [usize; 4] = [10, 20, 50, 100];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RhsPolicy {
    /// `b = A * ones`, so the exact solution is the ones vector.
    #[value(name = "Aones")]
    AOnes,
    /// `b = ones`.
    #[value(name = "ones")]
    Ones,
    /// Uniform in `[-1, 1)` from a ChaCha8 stream seeded with `--seed`.
    #[value(name = "random")]
    Random,
}

pub fn build_rhs(a: &CsrMatrix, policy: RhsPolicy, seed: u64) -> Vec<f64> {
    match policy {
        RhsPolicy::AOnes => a
            .spmv(&vec![1.0; a.ncols()])
            .expect("ones has ncols entries"),
        RhsPolicy::Ones => vec![1.0; a.nrows()],
        RhsPolicy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..a.nrows())
                .map(|_| rng.random_range(-1.0..1.0))
                .collect()
        }
    }
}

/// Usage mistakes, reported with exit status 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub fn matrix_dir() -> PathBuf {
    std::env::var_os(MATRIX_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_MATRIX_DIR))
}

/// A path to a Matrix Market file, or a collection name (`add32` or
/// `Hamm/add32`) looked up as `<name>.mtx` / `<name>.mtx.gz` in
/// [`matrix_dir`].
pub fn resolve_matrix(arg: &str) -> Result<PathBuf> {
    let path = Path::new(arg);
    if path.is_file() {
        return Ok(path.to_path_buf());
    }
    let arg = arg.rsplit('/').next().unwrap_or(arg);
    let dir = matrix_dir();
    for candidate in [format!("{arg}.mtx"), format!("{arg}.mtx.gz")] {
        let p = dir.join(candidate);
        if p.is_file() {
            return Ok(p);
        }
    }
    bail!(
        "matrix '{arg}' is neither a file nor present in {} (try `pbicgstab fetch {arg}`)",
        dir.display()
    )
}

/// File name without `.gz` and `.mtx`.
pub fn matrix_name(path: &Path) -> String {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = name.strip_suffix(".gz").unwrap_or(&name);
    name.strip_suffix(".mtx").unwrap_or(name).to_string()
}

pub struct LoadedMatrix {
    pub name: String,
    pub matrix: CsrMatrix,
}

pub fn load_matrix(arg: &str) -> Result<LoadedMatrix> {
    let path = resolve_matrix(arg)?;
    let matrix =
        read_matrix_market_file(&path).with_context(|| format!("reading {}", path.display()))?;
    if !matrix.is_square() {
        bail!(
            "{}: matrix is {}x{}, solvers need a square matrix",
            path.display(),
            matrix.nrows(),
            matrix.ncols()
        );
    }
    Ok(LoadedMatrix {
        name: matrix_name(&path),
        matrix,
    })
}

/// One solver run. `p-bicgstab-exblas` always reduces reproducibly, the
/// other methods with a `Tree` over `n` partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub method: Method,
    pub tol: f64,
    pub n: usize,
    pub rr_period: Option<usize>,
    pub rhs: RhsPolicy,
    pub seed: u64,
    pub max_iter: usize,
}

impl ExperimentSpec {
    pub fn config(&self) -> Result<SolverConfig, UsageError> {
        if self.method == Method::PipelinedReplacement && self.rr_period.is_none() {
            return Err(UsageError("p-bicgstab-rr requires --rr-period".to_string()));
        }
        let mut cfg = self
            .method
            .config(self.tol, self.n, self.rr_period)
            .map_err(|e| UsageError(e.to_string()))?;
        cfg.max_iter = self.max_iter;
        cfg.validate().map_err(|e| UsageError(e.to_string()))?;
        Ok(cfg)
    }

    pub fn mode(&self) -> ReductionMode {
        self.method.mode(self.n)
    }
}

pub struct RunResult {
    pub outcome: SolveOutcome,
    pub seconds: f64,
    /// `||b - A x|| / ||b||` recomputed sequentially.
    pub true_residual: f64,
}

pub fn run(a: &CsrMatrix, b: &[f64], method: Method, cfg: &SolverConfig) -> Result<RunResult> {
    let x0 = vec![0.0; a.nrows()];
    let start = Instant::now();
    let outcome = method.solve(a, b, &x0, cfg)?;
    let seconds = start.elapsed().as_secs_f64();
    let true_residual =
        true_residual(a, &outcome.x, b, ReductionMode::Sequential).unwrap_or(f64::NAN);
    Ok(RunResult {
        outcome,
        seconds,
        true_residual,
    })
}
