//! Dot products and norms under interchangeable reduction strategies.
//!
//! `Sequential` and `Tree` reproduce what a plain MPI code does (and
//! therefore depend on the partition count); `Reproducible` is exact up to
//! a single final rounding and does not.

use std::fmt;
use std::ops::Range;

use super::eft::EXACT_PRODUCT_FLOOR;
use super::expansion::{FloatExpansion, MAX_TERMS};
use super::superacc::Superaccumulator;
use super::ReproError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReductionMode {
    /// Left-to-right recursive summation of rounded products.
    Sequential,
    /// Contiguous blocks summed sequentially, partials combined pairwise.
    Tree { partitions: usize },
    /// Exact per-block accumulation, exact merge, one final rounding.
    Reproducible { partitions: usize },
}

impl ReductionMode {
    pub fn partitions(&self) -> usize {
        match *self {
            ReductionMode::Sequential => 1,
            ReductionMode::Tree { partitions } | ReductionMode::Reproducible { partitions } => {
                partitions
            }
        }
    }

    pub fn validate(&self) -> Result<(), ReproError> {
        if self.partitions() == 0 {
            return Err(ReproError::InvalidPartitions);
        }
        Ok(())
    }

    pub fn is_reproducible(&self) -> bool {
        matches!(self, ReductionMode::Reproducible { .. })
    }
}

impl fmt::Display for ReductionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionMode::Sequential => write!(f, "sequential"),
            ReductionMode::Tree { partitions } => write!(f, "tree({partitions})"),
            ReductionMode::Reproducible { partitions } => write!(f, "reproducible({partitions})"),
        }
    }
}

/// Balanced contiguous split of `0..len` into `parts` blocks; the first
/// `len % parts` blocks get one extra element. Blocks may be empty when
/// `parts > len`.
pub fn block_ranges(len: usize, parts: usize) -> impl Iterator<Item = Range<usize>> {
    let base = len / parts;
    let extra = len % parts;
    (0..parts).map(move |k| {
        let start = k * base + k.min(extra);
        let size = base + usize::from(k < extra);
        start..start + size
    })
}

/// Expansion backed by a long accumulator: the exact running value is
/// `expansion + accumulator`.
#[derive(Debug, Clone)]
pub struct ExactAccumulator {
    expansion: FloatExpansion,
    acc: Superaccumulator,
}

impl Default for ExactAccumulator {
    fn default() -> Self {
        Self {
            expansion: FloatExpansion::default(),
            acc: Superaccumulator::new(),
        }
    }
}

impl ExactAccumulator {
    pub fn with_capacity(capacity: usize) -> Result<Self, ReproError> {
        Ok(Self {
            expansion: FloatExpansion::with_capacity(capacity)?,
            acc: Superaccumulator::new(),
        })
    }

    #[inline]
    pub fn add(&mut self, x: f64) -> Result<(), ReproError> {
        self.expansion.insert(x, &mut self.acc)
    }

    /// Adds the exact product `a * b`.
    #[inline]
    pub fn add_product(&mut self, a: f64, b: f64) -> Result<(), ReproError> {
        add_product_into(&mut self.expansion, &mut self.acc, a, b)
    }

    /// Folds the expansion into the long accumulator.
    pub fn into_superaccumulator(mut self) -> Result<Superaccumulator, ReproError> {
        self.expansion.flush_into(&mut self.acc)?;
        Ok(self.acc)
    }

    pub fn spills(&self) -> u64 {
        self.expansion.overflow_count()
    }
}

#[inline]
fn add_product_into(
    expansion: &mut FloatExpansion,
    acc: &mut Superaccumulator,
    a: f64,
    b: f64,
) -> Result<(), ReproError> {
    let p = a * b;
    if p.is_finite() && p.abs() > EXACT_PRODUCT_FLOOR {
        let e = a.mul_add(b, -p);
        expansion.insert(p, acc)?;
        if e != 0.0 {
            expansion.insert(e, acc)?;
        }
        Ok(())
    } else {
        // Zero, tiny, overflowing or non-finite: the long accumulator
        // handles (or rejects) all of these directly.
        acc.add_product(a, b)
    }
}

/// Exact dot product of one block. Products are dealt round-robin to
/// [`LANES`] independent expansions sharing one accumulator; the cascades
/// of different lanes do not depend on each other and overlap in the
/// pipeline. The exact value, and so the rounded result, is unchanged.
fn block_dot(x: &[f64], y: &[f64], capacity: usize) -> Result<Superaccumulator, ReproError> {
    let mut acc = Superaccumulator::new();
    let mut lanes: [FloatExpansion; LANES] =
        std::array::from_fn(|_| FloatExpansion::with_capacity(capacity).expect("checked"));
    let xs = x.chunks_exact(LANES);
    let ys = y.chunks_exact(LANES);
    let (xr, yr) = (xs.remainder(), ys.remainder());
    for (cx, cy) in xs.zip(ys) {
        for (lane, (a, b)) in lanes.iter_mut().zip(cx.iter().zip(cy)) {
            add_product_into(lane, &mut acc, *a, *b)?;
        }
    }
    for (lane, (a, b)) in lanes.iter_mut().zip(xr.iter().zip(yr)) {
        add_product_into(lane, &mut acc, *a, *b)?;
    }
    for lane in lanes.iter_mut() {
        lane.flush_into(&mut acc)?;
    }
    Ok(acc)
}

const LANES: usize = 4;

fn check_lengths(x: &[f64], y: &[f64]) -> Result<(), ReproError> {
    if x.len() != y.len() {
        return Err(ReproError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(())
}

fn finite_result(value: f64, x: &[f64], y: &[f64]) -> Result<f64, ReproError> {
    if value.is_finite() {
        return Ok(value);
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        Err(ReproError::NonFinite)
    } else {
        Err(ReproError::ResultOverflow)
    }
}

#[inline]
fn sequential_partial(x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y) {
        s += a * b;
    }
    s
}

fn pairwise_combine<T>(mut partials: Vec<T>, combine: impl Fn(T, T) -> T) -> Option<T> {
    while partials.len() > 1 {
        let mut next = Vec::with_capacity(partials.len().div_ceil(2));
        let mut it = partials.into_iter();
        while let Some(left) = it.next() {
            match it.next() {
                Some(right) => next.push(combine(left, right)),
                None => next.push(left),
            }
        }
        partials = next;
    }
    partials.pop()
}

/// Reproducible dot product with an explicit expansion size.
pub fn reproducible_dot(
    x: &[f64],
    y: &[f64],
    partitions: usize,
    capacity: usize,
) -> Result<f64, ReproError> {
    check_lengths(x, y)?;
    if partitions == 0 {
        return Err(ReproError::InvalidPartitions);
    }
    FloatExpansion::with_capacity(capacity)?;
    let mut blocks = Vec::with_capacity(partitions);
    for range in block_ranges(x.len(), partitions) {
        blocks.push(block_dot(&x[range.clone()], &y[range], capacity)?);
    }
    pairwise_combine(blocks, |a, b| a.merged(&b))
        .unwrap_or_default()
        .round()
}

/// `sum(x_i * y_i)` evaluated under `mode`.
pub fn dot(x: &[f64], y: &[f64], mode: ReductionMode) -> Result<f64, ReproError> {
    check_lengths(x, y)?;
    mode.validate()?;
    match mode {
        ReductionMode::Sequential => finite_result(sequential_partial(x, y), x, y),
        ReductionMode::Tree { partitions } => {
            let partials: Vec<f64> = block_ranges(x.len(), partitions)
                .map(|r| sequential_partial(&x[r.clone()], &y[r]))
                .collect();
            let total = pairwise_combine(partials, |a, b| a + b).unwrap_or(0.0);
            finite_result(total, x, y)
        }
        ReductionMode::Reproducible { partitions } => reproducible_dot(x, y, partitions, MAX_TERMS),
    }
}

/// Euclidean norm, `sqrt(dot(x, x))`.
pub fn norm2(x: &[f64], mode: ReductionMode) -> Result<f64, ReproError> {
    Ok(dot(x, x, mode)?.sqrt())
}

/// Evaluates several dot products as one reduction phase.
///
/// In a distributed code every rank would compute its local partials for
/// all pairs and a single collective would combine them; results are
/// identical to calling [`dot`] on each pair.
pub fn dot_batch(pairs: &[(&[f64], &[f64])], mode: ReductionMode) -> Result<Vec<f64>, ReproError> {
    pairs.iter().map(|(x, y)| dot(x, y, mode)).collect()
}

/// Sum of a slice under `mode`.
pub fn sum(values: &[f64], mode: ReductionMode) -> Result<f64, ReproError> {
    mode.validate()?;
    match mode {
        ReductionMode::Reproducible { partitions } => {
            let mut blocks = Vec::with_capacity(partitions);
            for range in block_ranges(values.len(), partitions) {
                let mut acc = ExactAccumulator::default();
                for &v in &values[range] {
                    acc.add(v)?;
                }
                blocks.push(acc.into_superaccumulator()?);
            }
            pairwise_combine(blocks, |a, b| a.merged(&b))
                .unwrap_or_default()
                .round()
        }
        _ => {
            let ones = vec![1.0; values.len()];
            dot(values, &ones, mode)
        }
    }
}
