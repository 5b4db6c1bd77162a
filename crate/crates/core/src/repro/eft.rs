//! Error-free transformations on binary64.

use super::ReproError;

/// Smallest product magnitude for which the FMA residual of `a * b` is
/// guaranteed to be representable: below this the exact product has bits
/// under 2^-1074 and the residual itself would be rounded.
pub(crate) const EXACT_PRODUCT_FLOOR: f64 = f64::from_bits((1023 - 969) << 52); // 2^-969

/// Knuth's branch-free two-sum: `s = fl(a + b)` and `a + b = s + e` exactly.
///
/// Both inputs must be finite and the sum must not overflow.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// `p = fl(a * b)` and `a * b = p + e` exactly, using a fused multiply-add
/// for the residual.
///
/// Fails when the product overflows, and when it is so small that the
/// residual falls below the subnormal grid (the pair would no longer be
/// exact).
#[inline]
pub fn two_prod(a: f64, b: f64) -> Result<(f64, f64), ReproError> {
    if !a.is_finite() || !b.is_finite() {
        return Err(ReproError::NonFinite);
    }
    let p = a * b;
    if !p.is_finite() {
        return Err(ReproError::ProductOverflow);
    }
    if a == 0.0 || b == 0.0 {
        return Ok((p, 0.0));
    }
    if p.abs() <= EXACT_PRODUCT_FLOOR {
        // The residual may need bits below 2^-1074.
        if !is_exact_product(a, b) {
            return Err(ReproError::ProductUnderflow);
        }
    }
    Ok((p, a.mul_add(b, -p)))
}

/// Splits a finite binary64 into `(negative, mantissa, exponent)` with
/// `|x| = mantissa * 2^exponent`.
#[inline]
pub(crate) fn decompose(x: f64) -> (bool, u64, i32) {
    let bits = x.to_bits();
    let negative = bits >> 63 != 0;
    let biased = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if biased == 0 {
        (negative, frac, -1074)
    } else {
        (negative, frac | (1u64 << 52), biased - 1075)
    }
}

// For tiny products the residual is representable exactly when the exact
// product has no bits below 2^-1074 (p never does, and |e| <= ulp(p)/2 <= 2^-1022).
fn is_exact_product(a: f64, b: f64) -> bool {
    let (_, ma, ea) = decompose(a);
    let (_, mb, eb) = decompose(b);
    let product = ma as u128 * mb as u128;
    ea + eb + product.trailing_zeros() as i32 >= -1074
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sum_absorbs_tiny_addend() {
        assert_eq!(two_sum(1e16, 1.0), (1e16, 1.0));
        assert_eq!(two_sum(1.0, 2.0), (3.0, 0.0));
    }

    #[test]
    fn two_sum_point_one_point_two() {
        let (s, e) = two_sum(0.1, 0.2);
        assert_eq!(s, 0.30000000000000004);
        // Fraction(0.1) + Fraction(0.2) - Fraction(s), evaluated exactly.
        assert_eq!(e, -2.7755575615628914e-17);
    }

    #[test]
    fn two_prod_basic() {
        assert_eq!(two_prod(2.0, 3.0).unwrap(), (6.0, 0.0));
        assert_eq!(two_prod(0.0, 1e308).unwrap(), (0.0, 0.0));
        let x = 1.0 + f64::EPSILON;
        let (p, e) = two_prod(x, x).unwrap();
        // x^2 = 1 + 2^-51 + 2^-104
        assert_eq!(p, 1.0 + 2.0 * f64::EPSILON);
        assert_eq!(e, 2f64.powi(-104));
    }

    #[test]
    fn two_prod_rejects_overflow_and_underflow() {
        assert_eq!(two_prod(1e200, 1e200), Err(ReproError::ProductOverflow));
        assert_eq!(
            two_prod(1.0 + f64::EPSILON, 1e-300 * 1e-10),
            Err(ReproError::ProductUnderflow)
        );
        assert_eq!(two_prod(f64::NAN, 1.0), Err(ReproError::NonFinite));
        // Exact even though tiny: 2^-1000 * 2^-60 has a one-bit mantissa.
        assert_eq!(
            two_prod(2f64.powi(-1000), 2f64.powi(-60)).unwrap(),
            (2f64.powi(-1060), 0.0)
        );
    }

    #[test]
    fn decompose_subnormal_and_normal() {
        assert_eq!(decompose(f64::from_bits(1)), (false, 1, -1074));
        assert_eq!(decompose(-1.0), (true, 1u64 << 52, -52));
    }
}
