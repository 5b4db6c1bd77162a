//! Independent oracles and generators shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use pbicgstab::sparse::CsrMatrix;
use rand::Rng;

/// Exponent of the least significant bit any binary64 product can carry.
pub const PRODUCT_LSB: i32 = -2148;

/// `(negative, mantissa, exponent)` with `|x| = mantissa * 2^exponent`.
fn split(x: f64) -> (bool, u64, i32) {
    let bits = x.to_bits();
    let field = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1 << 52) - 1);
    let (m, e) = if field == 0 {
        (frac, -1074)
    } else {
        (frac | (1 << 52), field - 1075)
    };
    (bits >> 63 == 1, m, e)
}

fn signed(negative: bool, v: BigInt) -> BigInt {
    if negative {
        -v
    } else {
        v
    }
}

/// `x * 2^1074`, exact for every finite binary64.
pub fn scaled_value(x: f64) -> BigInt {
    let (neg, m, e) = split(x);
    signed(neg, BigInt::from(m) << (e + 1074) as usize)
}

/// `a * b * 2^2148`, exact for every pair of finite binary64.
pub fn scaled_product(a: f64, b: f64) -> BigInt {
    let (na, ma, ea) = split(a);
    let (nb, mb, eb) = split(b);
    let v = (BigInt::from(ma) * BigInt::from(mb)) << (ea + eb - PRODUCT_LSB) as usize;
    signed(na != nb, v)
}

/// Exact `sum x_i y_i`, scaled by `2^2148`.
pub fn exact_dot(x: &[f64], y: &[f64]) -> BigInt {
    x.iter()
        .zip(y)
        .fold(BigInt::zero(), |acc, (a, b)| acc + scaled_product(*a, *b))
}

/// Nearest binary64 (ties to even) to `n * 2^lsb`, with `lsb <= -1074`.
/// Infinity on overflow.
pub fn round_scaled(n: &BigInt, lsb: i32) -> f64 {
    assert!(lsb <= -1074);
    if n.is_zero() {
        return 0.0;
    }
    let mag = n.abs();
    let msb = mag.bits() as i32 - 1 + lsb;
    let mut target = (msb - 52).max(-1074);
    let shift = (target - lsb) as usize;
    let mut q = (&mag >> shift).to_u64().expect("at most 53 bits");
    if shift > 0 {
        let rem: BigInt = &mag - (BigInt::from(q) << shift);
        let half = BigInt::from(1u8) << (shift - 1);
        if rem > half || (rem == half && q & 1 == 1) {
            q += 1;
        }
    }
    if q == 1 << 53 {
        q >>= 1;
        target += 1;
    }
    let magnitude = if q < 1 << 52 {
        assert_eq!(target, -1074);
        f64::from_bits(q)
    } else {
        let biased = target + 52 + 1023;
        if biased >= 0x7ff {
            f64::INFINITY
        } else {
            f64::from_bits(((biased as u64) << 52) | (q - (1 << 52)))
        }
    };
    if n.is_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// Correctly rounded `sum x_i y_i` computed with big integers.
pub fn oracle_dot(x: &[f64], y: &[f64]) -> f64 {
    round_scaled(&exact_dot(x, y), PRODUCT_LSB)
}

/// Correctly rounded `sum v_i`.
pub fn oracle_sum(v: &[f64]) -> f64 {
    let n = v
        .iter()
        .fold(BigInt::zero(), |acc, x| acc + scaled_value(*x));
    round_scaled(&n, -1074)
}

/// Random sign times a magnitude log-uniform in `[10^lo, 10^hi]`.
pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    let e: f64 = rng.random_range(lo..hi);
    let m = 10f64.powf(e);
    if rng.random_bool(0.5) {
        -m
    } else {
        m
    }
}

pub fn log_uniform_vec(rng: &mut impl Rng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..len).map(|_| log_uniform(rng, lo, hi)).collect()
}

/// Dense row-major copy of `a`.
pub fn to_dense(a: &CsrMatrix) -> Vec<Vec<f64>> {
    let mut d = vec![vec![0.0; a.ncols()]; a.nrows()];
    for (i, j, v) in a.triplets() {
        d[i][j] += v;
    }
    d
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(*bi);
            r
        })
        .collect();
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        m.swap(k, pivot);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..=n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = m[i][n];
        for j in i + 1..n {
            s -= m[i][j] * x[j];
        }
        x[i] = s / m[i][i];
    }
    x
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Random nonsymmetric, strictly diagonally dominant matrix with roughly
/// `density` off-diagonal fill.
pub fn random_dominant(rng: &mut impl Rng, n: usize, density: f64) -> CsrMatrix {
    let mut triplets = Vec::new();
    for i in 0..n {
        let mut off = 0.0;
        for j in 0..n {
            if i != j && rng.random_bool(density) {
                let v: f64 = rng.random_range(-1.0..1.0);
                off += v.abs();
                triplets.push((i, j, v));
            }
        }
        let d: f64 = off + rng.random_range(0.5..2.0);
        triplets.push((i, i, if rng.random_bool(0.5) { d } else { -d }));
    }
    CsrMatrix::from_triplets(n, n, &triplets).unwrap()
}

/// Upwind finite-difference convection-diffusion operator on an `m x m`
/// grid: `-lap(u) + c . grad(u)` with Dirichlet boundaries. Nonsymmetric
/// for `c != 0`.
pub fn convection_diffusion(m: usize, cx: f64, cy: f64) -> CsrMatrix {
    let h = 1.0 / (m as f64 + 1.0);
    let (px, py) = (cx * h, cy * h);
    let idx = |i: usize, j: usize| i * m + j;
    let mut t = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let k = idx(i, j);
            t.push((k, k, 4.0 + px.abs() + py.abs()));
            let west = -1.0 - px.max(0.0);
            let east = -1.0 + px.min(0.0);
            let south = -1.0 - py.max(0.0);
            let north = -1.0 + py.min(0.0);
            if j > 0 {
                t.push((k, idx(i, j - 1), west));
            }
            if j + 1 < m {
                t.push((k, idx(i, j + 1), east));
            }
            if i > 0 {
                t.push((k, idx(i - 1, j), south));
            }
            if i + 1 < m {
                t.push((k, idx(i + 1, j), north));
            }
        }
    }
    CsrMatrix::from_triplets(m * m, m * m, &t).unwrap()
}
