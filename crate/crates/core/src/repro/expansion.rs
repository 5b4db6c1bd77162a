//! Short floating-point expansions used as a fast path in front of the
//! long accumulator.

use super::eft::two_sum;
use super::superacc::Superaccumulator;
use super::ReproError;

pub const MAX_TERMS: usize = 8;
pub const MIN_TERMS: usize = 2;

/// An unevaluated sum of at most `capacity` binary64 terms, largest first,
/// with `|next| <= ulp(prev) / 2` between consecutive non-zero terms.
/// Zero slots are kept at the tail.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatExpansion {
    terms: [f64; MAX_TERMS],
    capacity: usize,
    overflow_count: u64,
}

impl Default for FloatExpansion {
    fn default() -> Self {
        Self {
            terms: [0.0; MAX_TERMS],
            capacity: MAX_TERMS,
            overflow_count: 0,
        }
    }
}

impl FloatExpansion {
    pub fn with_capacity(capacity: usize) -> Result<Self, ReproError> {
        if !(MIN_TERMS..=MAX_TERMS).contains(&capacity) {
            return Err(ReproError::InvalidCapacity(capacity));
        }
        Ok(Self {
            capacity,
            ..Self::default()
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn terms(&self) -> &[f64] {
        &self.terms[..self.capacity]
    }

    /// How many values were handed to the long accumulator.
    pub fn overflow_count(&self) -> u64 {
        self.overflow_count
    }

    /// Adds `x` exactly: whatever cannot be kept in the expansion is spilled
    /// into `spill`, so `value(self) + value(spill)` grows by exactly `x`.
    #[inline]
    pub fn insert(&mut self, x: f64, spill: &mut Superaccumulator) -> Result<(), ReproError> {
        if !x.is_finite() {
            return Err(ReproError::NonFinite);
        }
        let mut carry = x;
        let mut touched = 0;
        for term in self.terms[..self.capacity].iter_mut() {
            if carry == 0.0 {
                break;
            }
            let (s, e) = two_sum(*term, carry);
            if !s.is_finite() {
                // The pair would overflow binary64; the accumulator takes it whole.
                break;
            }
            *term = s;
            carry = e;
            touched += 1;
        }
        if carry != 0.0 {
            spill.add(carry)?;
            self.overflow_count += 1;
        }
        if touched > 0 && !self.prefix_is_ordered(touched) {
            self.restore_ordering(spill)?;
        }
        Ok(())
    }

    // Terms past `touched` are unchanged, so only the first `touched + 1`
    // can violate the ordering.
    #[inline]
    fn prefix_is_ordered(&self, touched: usize) -> bool {
        let end = (touched + 1).min(self.capacity);
        // half_ulp(0) = 0 also keeps zeros at the tail.
        self.terms[..end]
            .windows(2)
            .fold(true, |ok, w| ok & (w[1].abs() <= half_ulp(w[0])))
    }

    // Cascaded two-sums keep the sum exact but may leave zeros or
    // overlapping neighbours behind (after cancellation). Compact the zeros
    // and move any offending term into the accumulator.
    fn restore_ordering(&mut self, spill: &mut Superaccumulator) -> Result<(), ReproError> {
        let mut kept = 0;
        for i in 0..self.capacity {
            let t = self.terms[i];
            if t == 0.0 {
                continue;
            }
            if kept > 0 && t.abs() > half_ulp(self.terms[kept - 1]) {
                spill.add(t)?;
                self.overflow_count += 1;
                continue;
            }
            self.terms[kept] = t;
            kept += 1;
        }
        for slot in self.terms[kept..self.capacity].iter_mut() {
            *slot = 0.0;
        }
        Ok(())
    }

    /// Moves every term into `acc` and clears the expansion.
    pub fn flush_into(&mut self, acc: &mut Superaccumulator) -> Result<(), ReproError> {
        for term in self.terms[..self.capacity].iter_mut() {
            if *term != 0.0 {
                acc.add(*term)?;
                *term = 0.0;
            }
        }
        Ok(())
    }
}

/// `ulp(a) / 2`, rounded to zero where it is not representable (the
/// lowest normal binade and subnormals, where no non-zero neighbour can
/// satisfy the bound anyway).
#[inline]
fn half_ulp(a: f64) -> f64 {
    // 2^exponent(a) * 2^-53; exact down to 2^-1074.
    f64::from_bits(a.to_bits() & 0x7ff0_0000_0000_0000) * f64::from_bits((1023 - 53) << 52)
}
