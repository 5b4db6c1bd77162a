//! Subcommand implementations.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use pbicgstab::solvers::{Method, SolveStatus};
use pbicgstab::sparse::CsrMatrix;
use rayon::prelude::*;

use crate::cli::{BenchArgs, FetchArgs, Format, RunArgs, SolveArgs, SweepArgs};
use crate::experiment::{
    build_rhs, load_matrix, matrix_dir, run, ExperimentSpec, LoadedMatrix, UsageError, RR_SWEEP,
};
use crate::fetch::{self, FetchStatus, KNOWN_MATRICES};
use crate::record::{render_markdown, write_csv, BenchRecord};

/// How a successful command ended, mapped to the process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    Success,
    /// The solve stopped on breakdown or the iteration cap.
    NotConverged,
    /// Exact reductions gave different results for different `n`.
    ReproducibilityViolation,
}

impl Completion {
    pub fn exit_code(self) -> u8 {
        match self {
            Completion::Success => 0,
            Completion::NotConverged => 3,
            Completion::ReproducibilityViolation => 4,
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit(records: &[BenchRecord], format: Format, output: Option<&Path>) -> Result<()> {
    let mut out = open_output(output)?;
    match format {
        Format::Csv => write_csv(records, &mut out)?,
        Format::Md => out.write_all(render_markdown(records).as_bytes())?,
    }
    out.flush()?;
    Ok(())
}

fn spec_of(
    method: Method,
    tol: f64,
    n: usize,
    rr_period: Option<usize>,
    run: &RunArgs,
) -> ExperimentSpec {
    ExperimentSpec {
        method,
        tol,
        n,
        rr_period,
        rhs: run.rhs,
        seed: run.seed,
        max_iter: run.max_iter,
    }
}

fn error_record(matrix: &str, spec: &ExperimentSpec, message: &str) -> BenchRecord {
    BenchRecord {
        matrix: matrix.to_string(),
        method: spec.method.name().to_string(),
        tol: spec.tol,
        n: spec.n,
        rr_period: spec.rr_period,
        iterations: 0,
        status: format!("error: {message}"),
        wall_time_s: 0.0,
        true_residual: f64::NAN,
    }
}

/// Runs one cell. Usage errors are returned; numerical results, including
/// failures, become the record.
pub fn run_cell(
    name: &str,
    a: &CsrMatrix,
    b: &[f64],
    spec: &ExperimentSpec,
) -> Result<BenchRecord> {
    let cfg = spec.config()?;
    let result = run(a, b, spec.method, &cfg)?;
    Ok(BenchRecord {
        matrix: name.to_string(),
        method: spec.method.name().to_string(),
        tol: spec.tol,
        n: spec.n,
        rr_period: cfg.rr_period,
        iterations: result.outcome.iterations,
        status: result.outcome.status.to_string(),
        wall_time_s: result.seconds,
        true_residual: result.true_residual,
    })
}

/// Like [`run_cell`], but `p-bicgstab-rr` without a period tries every
/// period in [`RR_SWEEP`] and keeps the converged run with the fewest
/// iterations.
fn run_bench_cell(name: &str, a: &CsrMatrix, b: &[f64], spec: &ExperimentSpec) -> BenchRecord {
    let attempt = |spec: &ExperimentSpec| {
        run_cell(name, a, b, spec).unwrap_or_else(|e| error_record(name, spec, &format!("{e:#}")))
    };
    if spec.method != Method::PipelinedReplacement || spec.rr_period.is_some() {
        return attempt(spec);
    }
    RR_SWEEP
        .iter()
        .map(|&k| {
            attempt(&ExperimentSpec {
                rr_period: Some(k),
                ..spec.clone()
            })
        })
        .min_by_key(|r| (!r.converged(), r.iterations))
        .expect("sweep is non-empty")
}

fn summary_line(r: &BenchRecord) -> String {
    let mut line = format!(
        "matrix={} method={} tol={:e} n={}",
        r.matrix, r.method, r.tol, r.n
    );
    if let Some(k) = r.rr_period {
        line.push_str(&format!(" rr_period={k}"));
    }
    line.push_str(&format!(
        " iterations={} status={} time={:.6}s true_residual={:e}",
        r.iterations, r.status, r.wall_time_s, r.true_residual
    ));
    line
}

pub fn solve(args: &SolveArgs) -> Result<Completion> {
    let spec = spec_of(args.method, args.tol, args.n, args.rr_period, &args.run);
    spec.config()?;
    let LoadedMatrix { name, matrix } = load_matrix(&args.matrix)?;
    let b = build_rhs(&matrix, spec.rhs, spec.seed);
    let record = run_cell(&name, &matrix, &b, &spec)?;
    println!("{}", summary_line(&record));
    if let Some(path) = &args.run.output {
        emit(std::slice::from_ref(&record), Format::Csv, Some(path))?;
    }
    Ok(if record.converged() {
        Completion::Success
    } else {
        Completion::NotConverged
    })
}

/// One record per `(matrix, method, tol)` in input order; cells run in
/// parallel.
pub fn bench_records(args: &BenchArgs) -> Result<Vec<BenchRecord>> {
    for &tol in &args.tol {
        for &method in &args.method {
            let mut spec = spec_of(method, tol, args.n, args.rr_period, &args.run);
            if method == Method::PipelinedReplacement && spec.rr_period.is_none() {
                spec.rr_period = Some(RR_SWEEP[0]);
            }
            spec.config()?;
        }
    }

    type Loaded = (String, Result<(CsrMatrix, Vec<f64>), String>);
    let matrices: Vec<Loaded> = args
        .matrix
        .iter()
        .map(|arg| match load_matrix(arg) {
            Ok(LoadedMatrix { name, matrix }) => {
                let b = build_rhs(&matrix, args.run.rhs, args.run.seed);
                (name, Ok((matrix, b)))
            }
            Err(e) => (arg.clone(), Err(format!("{e:#}"))),
        })
        .collect();

    let mut cells = Vec::new();
    for (mi, _) in matrices.iter().enumerate() {
        for &tol in &args.tol {
            for &method in &args.method {
                cells.push((mi, spec_of(method, tol, args.n, args.rr_period, &args.run)));
            }
        }
    }

    Ok(cells
        .par_iter()
        .map(|(mi, spec)| {
            let (name, loaded) = &matrices[*mi];
            match loaded {
                Ok((a, b)) => run_bench_cell(name, a, b, spec),
                Err(message) => error_record(name, spec, message),
            }
        })
        .collect())
}

pub fn bench(args: &BenchArgs) -> Result<Completion> {
    let records = bench_records(args)?;
    for r in records.iter().filter(|r| r.status.starts_with("error")) {
        eprintln!("{}: {} tol={:e}: {}", r.matrix, r.method, r.tol, r.status);
    }
    emit(&records, args.format, args.run.output.as_deref())?;
    Ok(Completion::Success)
}

/// Whether every record agrees on status, iteration count and residual,
/// compared bitwise.
pub fn identical_across_n(records: &[BenchRecord]) -> bool {
    records.windows(2).all(|w| {
        w[0].status == w[1].status
            && w[0].iterations == w[1].iterations
            && w[0].true_residual.to_bits() == w[1].true_residual.to_bits()
    })
}

pub fn sweep_partitions(args: &SweepArgs) -> Result<Completion> {
    if args.n.is_empty() {
        bail!(UsageError("--n needs at least one partition count".into()));
    }
    for &n in &args.n {
        spec_of(args.method, args.tol, n, args.rr_period, &args.run).config()?;
    }
    let LoadedMatrix { name, matrix } = load_matrix(&args.matrix)?;
    let b = build_rhs(&matrix, args.run.rhs, args.run.seed);
    let records = args
        .n
        .iter()
        .map(|&n| {
            let spec = spec_of(args.method, args.tol, n, args.rr_period, &args.run);
            run_cell(&name, &matrix, &b, &spec)
        })
        .collect::<Result<Vec<_>>>()?;
    emit(&records, args.format, args.run.output.as_deref())?;

    let counts: Vec<String> = records
        .iter()
        .map(|r| format!("n={}:{}", r.n, r.iterations))
        .collect();
    let same = identical_across_n(&records);
    if args.method == Method::PipelinedExact {
        if !same {
            eprintln!(
                "reproducibility violation: {} {} results differ across n ({})",
                name,
                args.method,
                counts.join(" ")
            );
            return Ok(Completion::ReproducibilityViolation);
        }
        eprintln!(
            "reproducible: identical results across n ({})",
            counts.join(" ")
        );
    } else if !same {
        eprintln!("results differ across n ({})", counts.join(" "));
    }
    Ok(Completion::Success)
}

pub fn history(args: &SolveArgs) -> Result<Completion> {
    let spec = spec_of(args.method, args.tol, args.n, args.rr_period, &args.run);
    let mut cfg = spec.config()?;
    cfg.record_true_residual = true;
    let LoadedMatrix { name, matrix } = load_matrix(&args.matrix)?;
    let b = build_rhs(&matrix, spec.rhs, spec.seed);
    let x0 = vec![0.0; matrix.nrows()];
    let outcome = spec.method.solve(&matrix, &b, &x0, &cfg)?;

    let mut out = open_output(args.run.output.as_deref())?;
    writeln!(out, "iter,rel_recursive_residual,rel_true_residual")?;
    let truth = outcome
        .true_residual_history
        .as_deref()
        .expect("requested true residual history");
    for (i, (rec, tru)) in outcome
        .recursive_residual_history
        .iter()
        .zip(truth)
        .enumerate()
    {
        writeln!(out, "{i},{rec:?},{tru:?}")?;
    }
    out.flush()?;
    eprintln!(
        "{} {}: {} after {} iterations",
        name, spec.method, outcome.status, outcome.iterations
    );
    Ok(match outcome.status {
        SolveStatus::Converged => Completion::Success,
        _ => Completion::NotConverged,
    })
}

pub fn fetch(args: &FetchArgs) -> Result<Completion> {
    let targets: Vec<(String, String)> = if args.all {
        KNOWN_MATRICES
            .iter()
            .map(|(g, n)| (g.to_string(), n.to_string()))
            .collect()
    } else {
        if args.names.is_empty() {
            bail!(UsageError("fetch needs matrix names or --all".into()));
        }
        args.names
            .iter()
            .map(|arg| {
                let (group, name) = match arg.split_once('/') {
                    Some((g, n)) => (Some(g.to_string()), n.to_string()),
                    None => (args.group.clone(), arg.clone()),
                };
                let group = group
                    .or_else(|| fetch::known_group(&name).map(str::to_string))
                    .ok_or_else(|| fetch::FetchError::UnknownGroup(name.clone()))?;
                Ok((group, name))
            })
            .collect::<Result<_>>()?
    };
    let dest = args.dest.clone().unwrap_or_else(matrix_dir);
    let base = fetch::base_url();
    for (group, name) in &targets {
        let (path, status) = fetch::fetch_matrix(&base, group, name, &dest)?;
        let (rows, cols, nnz) = fetch::verify_matrix_file(&path)?;
        let verb = match status {
            FetchStatus::Downloaded => "fetched",
            FetchStatus::AlreadyPresent => "present",
        };
        println!(
            "{verb} {group}/{name} -> {} ({rows}x{cols}, {nnz} entries)",
            path.display()
        );
    }
    Ok(Completion::Success)
}
