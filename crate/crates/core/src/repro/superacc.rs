//! Kulisch-style long accumulator covering every binary64 product.
//!
//! The register is a little-endian array of signed 64-bit words. Word `i`
//! carries a 52-bit digit of weight `2^(52 i - 2148)`; the 11 spare bits of
//! each word absorb carries so that additions never propagate eagerly.
//! Carries are resolved every [`NORMALIZE_EVERY`] additions, before any word
//! can leave the `i64` range. The top word is the only signed digit once
//! normalized.

use super::eft::decompose;
use super::ReproError;

/// Bits of value held by each word after normalization.
pub const DIGIT_BITS: u32 = 52;
/// Number of words; `83 * 52 = 4316` bits starting at 2^-2148.
pub const NUM_DIGITS: usize = 83;
/// Weight of the least significant bit: the exact product of two smallest
/// subnormals is `2^-1074 * 2^-1074`.
pub const MIN_EXPONENT: i32 = -2148;

const DIGIT_MASK: i64 = (1 << DIGIT_BITS) - 1;
/// Each un-normalized add contributes less than 2^52 to a word, so 1024 adds
/// on top of a normalized word stay below 2^63.
const NORMALIZE_EVERY: u32 = 1024;
/// A normalized top word at or beyond this bound means the value left the
/// representable range (~2^2126); well past any sum of 2^40 products.
const TOP_LIMIT: i64 = 1 << 10;

/// Global bit index of 2^-1074, the binary64 subnormal quantum.
const SUBNORMAL_LSB: u32 = (-1074 - MIN_EXPONENT) as u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccStatus {
    Exact,
    Overflowed,
}

#[derive(Clone, PartialEq, Eq)]
pub struct Superaccumulator {
    digits: [i64; NUM_DIGITS],
    pending: u32,
    status: AccStatus,
}

impl Default for Superaccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl std::fmt::Debug for Superaccumulator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let used: Vec<(usize, i64)> = self
            .digits
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, d)| d != 0)
            .collect();
        f.debug_struct("Superaccumulator")
            .field("digits", &used)
            .field("pending", &self.pending)
            .field("status", &self.status)
            .finish()
    }
}

impl Superaccumulator {
    pub fn new() -> Self {
        Self {
            digits: [0; NUM_DIGITS],
            pending: 0,
            status: AccStatus::Exact,
        }
    }

    pub fn status(&self) -> AccStatus {
        self.status
    }

    /// Adds a finite binary64 exactly.
    pub fn add(&mut self, x: f64) -> Result<(), ReproError> {
        if !x.is_finite() {
            return Err(ReproError::NonFinite);
        }
        if x == 0.0 {
            return Ok(());
        }
        let (negative, mantissa, exponent) = decompose(x);
        self.add_integer(negative, mantissa as u128, exponent);
        Ok(())
    }

    /// Adds the exact (unrounded) product `a * b`. Works across the whole
    /// binary64 range, including products that overflow or underflow in
    /// binary64.
    pub fn add_product(&mut self, a: f64, b: f64) -> Result<(), ReproError> {
        if !a.is_finite() || !b.is_finite() {
            return Err(ReproError::NonFinite);
        }
        if a == 0.0 || b == 0.0 {
            return Ok(());
        }
        let (na, ma, ea) = decompose(a);
        let (nb, mb, eb) = decompose(b);
        self.add_integer(na != nb, ma as u128 * mb as u128, ea + eb);
        Ok(())
    }

    /// Adds `±magnitude * 2^exponent`. `magnitude < 2^106`,
    /// `exponent >= MIN_EXPONENT`.
    fn add_integer(&mut self, negative: bool, magnitude: u128, exponent: i32) {
        debug_assert!(exponent >= MIN_EXPONENT);
        let position = (exponent - MIN_EXPONENT) as u32;
        let mut index = (position / DIGIT_BITS) as usize;
        let shift = position % DIGIT_BITS;

        let room = DIGIT_BITS - shift;
        let first = ((magnitude & ((1u128 << room) - 1)) << shift) as i64;
        let mut rest = magnitude >> room;
        self.bump(index, negative, first);
        while rest != 0 {
            index += 1;
            self.bump(index, negative, (rest as i64) & DIGIT_MASK);
            rest >>= DIGIT_BITS;
        }

        self.pending += 1;
        if self.pending >= NORMALIZE_EVERY {
            self.normalize();
        }
    }

    #[inline]
    fn bump(&mut self, index: usize, negative: bool, chunk: i64) {
        if negative {
            self.digits[index] -= chunk;
        } else {
            self.digits[index] += chunk;
        }
    }

    /// Resolves carries: words `0..NUM_DIGITS-1` end up in `[0, 2^52)` and
    /// the top word holds the signed remainder.
    fn normalize(&mut self) {
        let mut carry = 0i64;
        for digit in self.digits[..NUM_DIGITS - 1].iter_mut() {
            let v = *digit + carry;
            carry = v >> DIGIT_BITS;
            *digit = v & DIGIT_MASK;
        }
        self.digits[NUM_DIGITS - 1] += carry;
        if self.digits[NUM_DIGITS - 1].abs() >= TOP_LIMIT {
            self.status = AccStatus::Overflowed;
        }
        self.pending = 0;
    }

    /// Exact sum of two accumulators. Overflow in either input propagates.
    pub fn merge(&mut self, other: &Superaccumulator) {
        if other.status == AccStatus::Overflowed {
            self.status = AccStatus::Overflowed;
        }
        if self.status == AccStatus::Overflowed {
            return;
        }
        let mut other = other.clone();
        other.normalize();
        self.normalize();
        for (d, o) in self.digits.iter_mut().zip(other.digits.iter()) {
            *d += *o;
        }
        // Each word now holds at most two normalized digits.
        self.pending = 2;
        self.normalize();
    }

    /// Consumes both operands; convenience for tree reductions.
    pub fn merged(mut self, other: &Superaccumulator) -> Superaccumulator {
        self.merge(other);
        self
    }

    pub fn is_zero(&self) -> bool {
        let mut n = self.clone();
        n.normalize();
        n.digits.iter().all(|&d| d == 0)
    }

    /// The binary64 nearest to the accumulated value, ties to even.
    pub fn round(&self) -> Result<f64, ReproError> {
        if self.status == AccStatus::Overflowed {
            return Err(ReproError::AccumulatorOverflow);
        }
        let mut m = self.clone();
        m.normalize();
        if m.status == AccStatus::Overflowed {
            return Err(ReproError::AccumulatorOverflow);
        }
        let negative = m.digits[NUM_DIGITS - 1] < 0;
        if negative {
            for d in m.digits.iter_mut() {
                *d = -*d;
            }
            m.normalize();
        }
        let magnitude = m.round_magnitude()?;
        Ok(if negative { -magnitude } else { magnitude })
    }

    fn round_magnitude(&self) -> Result<f64, ReproError> {
        let Some(top) = self.digits.iter().rposition(|&d| d != 0) else {
            return Ok(0.0);
        };
        let top_word = self.digits[top] as u64;
        let msb = top as u32 * DIGIT_BITS + (63 - top_word.leading_zeros());

        // 53 significant bits, or fewer once the result is subnormal.
        let lsb = msb.saturating_sub(52).max(SUBNORMAL_LSB);
        let mut mantissa: u64 = 0;
        if msb >= lsb {
            for g in (lsb..=msb).rev() {
                mantissa = (mantissa << 1) | self.bit(g);
            }
        }
        let guard = self.bit(lsb - 1) == 1;
        let sticky = self.any_below(lsb - 1);
        if guard && (sticky || mantissa & 1 == 1) {
            mantissa += 1;
        }

        let mut lsb = lsb as i32;
        if mantissa == 1 << 53 {
            mantissa >>= 1;
            lsb += 1;
        }
        if mantissa < 1 << 52 {
            // Subnormal (or zero): the grid is 2^-1074 and the field is 0.
            debug_assert_eq!(lsb as u32, SUBNORMAL_LSB);
            return Ok(f64::from_bits(mantissa));
        }
        let biased = lsb + MIN_EXPONENT + 52 + 1023;
        if biased >= 0x7ff {
            return Err(ReproError::ResultOverflow);
        }
        Ok(f64::from_bits(
            ((biased as u64) << 52) | (mantissa & ((1 << 52) - 1)),
        ))
    }

    // Valid on a normalized, non-negative register.
    #[inline]
    fn bit(&self, g: u32) -> u64 {
        let index = ((g / DIGIT_BITS) as usize).min(NUM_DIGITS - 1);
        let offset = g - index as u32 * DIGIT_BITS;
        if offset >= 63 {
            0
        } else {
            ((self.digits[index] as u64) >> offset) & 1
        }
    }

    // Whether any bit strictly below global bit `g` is set.
    fn any_below(&self, g: u32) -> bool {
        let index = ((g / DIGIT_BITS) as usize).min(NUM_DIGITS - 1);
        let offset = g - index as u32 * DIGIT_BITS;
        let mask = if offset >= 64 {
            u64::MAX
        } else {
            (1u64 << offset) - 1
        };
        (self.digits[index] as u64) & mask != 0 || self.digits[..index].iter().any(|&d| d != 0)
    }

    #[cfg(test)]
    pub(crate) fn force_top_word(&mut self, value: i64) {
        self.digits[NUM_DIGITS - 1] = value;
        self.normalize();
    }
}
