//! Thin helpers around a binary arbitrary-precision float.
//!
//! The operational-matrix sums are rational functions of the (exactly
//! representable) f64 parameters, but their alternating terms cancel by
//! roughly 2.6 bits per degree. When double-double runs out of digits the
//! same sums are re-evaluated here with enough working precision to absorb
//! the cancellation.

use dashu_base::{BitTest, UnsignedAbs};
use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;
use dashu_int::IBig;

use crate::special::SignedLogValue;

pub(crate) type Big = FBig<HalfEven, 2>;

/// Exact conversion of a finite f64, carried at `prec` bits.
pub(crate) fn big(x: f64, prec: usize) -> Big {
    Big::try_from(x)
        .expect("finite f64")
        .with_precision(prec)
        .value()
}

/// `x + j` for an integer shift, exact at `prec` bits.
pub(crate) fn big_shift(x: f64, j: i64, prec: usize) -> Big {
    big(x, prec) + big(j as f64, prec)
}

/// Natural log of |x| together with its sign; zero maps to [`SignedLogValue::ZERO`].
pub(crate) fn to_signed_log(x: &Big) -> SignedLogValue {
    let repr = x.repr();
    let sig: &IBig = repr.significand();
    if *sig == IBig::ZERO {
        return SignedLogValue::ZERO;
    }
    let bits = sig.unsigned_abs().bit_len();
    let shift = bits.saturating_sub(60);
    let top: IBig = sig >> shift;
    let top = i64::try_from(&top).expect("60-bit significand fits in i64");
    let sign = if top < 0 { -1 } else { 1 };
    let top = top.unsigned_abs();
    // mantissa in [1/2, 1) so its log carries no large cancelling part
    let top_bits = 64 - top.leading_zeros() as i32;
    let mantissa = top as f64 / 2f64.powi(top_bits);
    let exp2 = top_bits as f64 + shift as f64 + repr.exponent() as f64;
    let logmag = mantissa.ln() + exp2 * std::f64::consts::LN_2;
    SignedLogValue::new(sign, logmag)
}

/// log2 |x|, or −∞ for zero. Accurate to a fraction of a bit, which is all
/// the precision bookkeeping needs.
pub(crate) fn log2_abs(x: &Big) -> f64 {
    let v = to_signed_log(x);
    if v.is_zero() {
        f64::NEG_INFINITY
    } else {
        v.logmag() / std::f64::consts::LN_2
    }
}
