//! Real-argument special functions in sign-tracked logarithmic form.
//!
//! Every Gamma and Beta factor of the operational-matrix coefficients goes
//! through [`SignedLogValue`], so products of large and small factors never
//! overflow and any cancellation is confined to the final summation.

use std::f64::consts::PI;
use std::ops::{Div, Mul, Neg};

use crate::dd::Dd;

use crate::error::{Error, Result};

/// `ln(2π) / 2`
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Lanczos approximation, g = 607/128, 15 terms (Godfrey).
const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS_COEFFS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_8e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_9e-3,
    0.217_439_618_115_212_6e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

/// Distance below which `rgamma` treats its argument as a pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

/// A real number stored as a sign and the natural log of its magnitude.
///
/// `sign == 0` is exact zero; `logmag` is ignored in that case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLogValue {
    sign: i8,
    logmag: f64,
}

impl SignedLogValue {
    pub const ZERO: SignedLogValue = SignedLogValue {
        sign: 0,
        logmag: f64::NEG_INFINITY,
    };
    pub const ONE: SignedLogValue = SignedLogValue {
        sign: 1,
        logmag: 0.0,
    };

    pub fn new(sign: i8, logmag: f64) -> Self {
        match sign.signum() {
            0 => Self::ZERO,
            s => SignedLogValue { sign: s, logmag },
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLogValue {
                sign: if x > 0.0 { 1 } else { -1 },
                logmag: x.abs().ln(),
            }
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn logmag(&self) -> f64 {
        self.logmag
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(&self) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * self.logmag.exp()
        }
    }

    /// Value multiplied by `exp(-shift)`; used to rescale a batch of terms by
    /// their largest log-magnitude before summation.
    pub fn to_f64_scaled(&self, shift: f64) -> f64 {
        if self.sign == 0 {
            0.0
        } else {
            f64::from(self.sign) * (self.logmag - shift).exp()
        }
    }

    pub fn recip(self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero SignedLogValue");
        SignedLogValue {
            sign: self.sign,
            logmag: -self.logmag,
        }
    }

    pub fn powf(self, e: f64) -> Self {
        assert!(self.sign >= 0, "real power of a negative SignedLogValue");
        if self.sign == 0 {
            return Self::ZERO;
        }
        SignedLogValue {
            sign: 1,
            logmag: self.logmag * e,
        }
    }
}

impl Mul for SignedLogValue {
    type Output = SignedLogValue;
    fn mul(self, rhs: Self) -> Self {
        if self.sign == 0 || rhs.sign == 0 {
            return Self::ZERO;
        }
        SignedLogValue {
            sign: self.sign * rhs.sign,
            logmag: self.logmag + rhs.logmag,
        }
    }
}

impl Div for SignedLogValue {
    type Output = SignedLogValue;
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl Neg for SignedLogValue {
    type Output = SignedLogValue;
    fn neg(self) -> Self {
        SignedLogValue {
            sign: -self.sign,
            logmag: self.logmag,
        }
    }
}

/// `sin(πx)` with exact argument reduction.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let mut r = x - 2.0 * (0.5 * x).round();
    if r > 0.5 {
        r = 1.0 - r;
    } else if r < -0.5 {
        r = -1.0 - r;
    }
    (PI * r).sin()
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// ln Γ(x) for x ≥ 0.5.
fn ln_gamma_positive(x: f64) -> f64 {
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + sum.ln()
}

/// Sign and log-magnitude of Γ(x).
pub fn log_gamma_signed(x: f64) -> Result<SignedLogValue> {
    if x.is_nan() {
        return Err(Error::domain("log_gamma_signed of NaN"));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole(x));
    }
    if x >= 0.5 {
        return Ok(SignedLogValue::new(1, ln_gamma_positive(x)));
    }
    // Reflection: Γ(x) Γ(1-x) = π / sin(πx)
    let s = sin_pi(x);
    let logmag = PI.ln() - s.abs().ln() - ln_gamma_positive(1.0 - x);
    Ok(SignedLogValue::new(if s > 0.0 { 1 } else { -1 }, logmag))
}

/// Γ(x) as a plain float.
pub fn gamma(x: f64) -> Result<f64> {
    log_gamma_signed(x).map(|v| v.to_f64())
}

/// Reciprocal Gamma function 1/Γ(x), entire; exactly zero at non-positive integers.
pub fn rgamma(x: f64) -> f64 {
    rgamma_signed(x).to_f64()
}

pub(crate) fn rgamma_signed(x: f64) -> SignedLogValue {
    let r = x.round();
    if r <= 0.0 && (x - r).abs() < POLE_TOLERANCE {
        return SignedLogValue::ZERO;
    }
    match log_gamma_signed(x) {
        Ok(v) => v.recip(),
        Err(_) => SignedLogValue::ZERO,
    }
}

/// Beta function B(x, y) = Γ(x)Γ(y)/Γ(x+y) for x, y > 0.
pub fn beta(x: f64, y: f64) -> Result<SignedLogValue> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::domain(format!(
            "beta requires positive arguments, got ({x}, {y})"
        )));
    }
    // fixed evaluation order keeps beta(x, y) == beta(y, x) bit-for-bit
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    let logmag = ln_gamma_positive_any(lo) + ln_gamma_positive_any(hi)
        - ln_gamma_positive_any(lo + hi);
    Ok(SignedLogValue::new(1, logmag))
}

fn ln_gamma_positive_any(x: f64) -> f64 {
    if x >= 0.5 {
        ln_gamma_positive(x)
    } else {
        // Γ(x) = Γ(x+1)/x keeps the Lanczos sum in its accurate range
        ln_gamma_positive(x + 1.0) - x.ln()
    }
}

/// Generalized binomial Γ(η+1)/Γ(η−μ+1).
pub fn gen_binom(eta: f64, mu: f64) -> Result<f64> {
    if is_nonpositive_integer(eta + 1.0) {
        return Err(Error::Pole(eta + 1.0));
    }
    if mu >= 0.0 && mu == mu.floor() && mu <= 170.0 {
        // falling factorial η(η−1)···(η−μ+1)
        let mut prod = 1.0;
        for j in 0..mu as usize {
            prod *= eta - j as f64;
        }
        return Ok(prod);
    }
    let num = log_gamma_signed(eta + 1.0)?;
    Ok((num * rgamma_signed(eta - mu + 1.0)).to_f64())
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Rising factorial (x)_k = x(x+1)···(x+k−1) in double-double.
pub(crate) fn rising_dd(x: f64, k: usize) -> Dd {
    let mut p = Dd::from(1.0);
    for j in 0..k {
        p *= Dd::sum_of(x, j as f64);
    }
    p
}

/// ln of the rising factorial (x)_k for x > 0.
pub(crate) fn ln_rising(x: f64, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    ln_gamma_positive_any(x + k as f64) - ln_gamma_positive_any(x)
}

pub(crate) fn ln_factorial(n: usize) -> f64 {
    ln_gamma_positive((n + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn log_gamma_known_values() {
        let v = log_gamma_signed(5.0).unwrap();
        assert_eq!(v.sign(), 1);
        assert_relative_eq!(v.logmag(), 24f64.ln(), epsilon = 1e-14);

        let v = log_gamma_signed(0.5).unwrap();
        assert_eq!(v.sign(), 1);
        assert_relative_eq!(v.logmag(), PI.sqrt().ln(), epsilon = 1e-14);

        // Γ(−3/2) = 4√π/3
        let v = log_gamma_signed(-1.5).unwrap();
        assert_eq!(v.sign(), 1);
        assert_relative_eq!(v.to_f64(), 4.0 * PI.sqrt() / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn log_gamma_poles() {
        for x in [0.0, -1.0, -2.0, -17.0] {
            assert!(matches!(log_gamma_signed(x), Err(Error::Pole(_))));
        }
    }

    #[test]
    fn gamma_factorials_up_to_fifty() {
        let mut fact = 1.0f64;
        for n in 1..50 {
            // Γ(n+1) = n!
            fact *= n as f64;
            let g = gamma((n + 1) as f64).unwrap();
            assert_relative_eq!(g, fact, max_relative = 1e-13);
        }
    }

    #[test]
    fn gamma_negative_half_integers() {
        // Γ(1/2 − k) = (−4)^k k! √π / (2k)!
        let sqrt_pi = PI.sqrt();
        let mut k_fact = 1.0;
        let mut two_k_fact = 1.0;
        for k in 1..20usize {
            k_fact *= k as f64;
            two_k_fact *= (2 * k - 1) as f64 * (2 * k) as f64;
            let expected = (-4f64).powi(k as i32) * k_fact * sqrt_pi / two_k_fact;
            let got = gamma(0.5 - k as f64).unwrap();
            assert_relative_eq!(got, expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn rgamma_values() {
        assert_eq!(rgamma(0.0), 0.0);
        assert_eq!(rgamma(-3.0), 0.0);
        assert_relative_eq!(rgamma(1.0), 1.0, epsilon = 1e-15);
        // Γ(−5/2) = −8√π/15
        assert_relative_eq!(
            rgamma(-2.5),
            -15.0 / (8.0 * PI.sqrt()),
            max_relative = 1e-14
        );
    }

    #[test]
    fn rgamma_matches_brute_force_product() {
        // 1/Γ(x) = x(x+1)···(x+k−1) / Γ(x+k) with x+k in the Lanczos range
        for &x in &[-7.3, -2.5, -0.999, 0.2, 3.7] {
            let k = 12;
            let mut prod = 1.0;
            for j in 0..k {
                prod *= x + j as f64;
            }
            let expected = prod / gamma(x + k as f64).unwrap();
            assert_relative_eq!(rgamma(x), expected, max_relative = 1e-13);
        }
    }

    #[test]
    fn rgamma_is_continuous_across_poles() {
        let eps = 1e-8;
        for k in 0..=10 {
            let c = (1..=k).map(|j| j as f64).product::<f64>() * 1.01;
            for x in [-(k as f64) - eps, -(k as f64) + eps] {
                assert!(rgamma(x).abs() <= c * eps, "k={k} x={x}");
            }
        }
    }

    #[test]
    fn reconstruction_over_dense_grid() {
        let mut x: f64 = 0.01;
        while x <= 30.0 {
            let lg = log_gamma_signed(x).unwrap();
            let prod = lg.logmag().exp() * rgamma(x);
            assert!((prod - 1.0).abs() <= 1e-12, "x={x} prod={prod}");
            x += 0.0137;
        }
    }

    #[test]
    fn gamma_recurrence_in_signed_log_form() {
        let mut x: f64 = -20.0 + 0.013;
        while x <= 20.0 {
            if (x - x.round()).abs() > 1e-6 && (x + 1.0 - (x + 1.0).round()).abs() > 1e-6 {
                let lhs = log_gamma_signed(x + 1.0).unwrap();
                let rhs = SignedLogValue::from_f64(x) * log_gamma_signed(x).unwrap();
                assert_eq!(lhs.sign(), rhs.sign(), "x={x}");
                assert!((lhs.logmag() - rhs.logmag()).abs() <= 1e-12, "x={x}");
            }
            x += 0.071;
        }
    }

    #[test]
    fn beta_values() {
        assert_relative_eq!(beta(1.0, 1.0).unwrap().to_f64(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(beta(0.5, 0.5).unwrap().to_f64(), PI, max_relative = 1e-14);
        // ∫₀¹ t(1−t)² dt
        assert_relative_eq!(beta(2.0, 3.0).unwrap().to_f64(), 1.0 / 12.0, max_relative = 1e-14);
        assert!(beta(0.0, 1.0).is_err());
        assert!(beta(1.0, -0.5).is_err());
    }

    #[test]
    fn gen_binom_values() {
        assert_eq!(gen_binom(5.0, 2.0).unwrap(), 20.0);
        assert_eq!(gen_binom(0.3, 0.0).unwrap(), 1.0);
        assert_relative_eq!(gen_binom(0.5, 0.5).unwrap(), PI.sqrt() / 2.0, max_relative = 1e-14);
        assert!(matches!(gen_binom(-2.0, 0.5), Err(Error::Pole(_))));
        // Γ(η−μ+1) at a pole: quotient is zero
        assert_eq!(gen_binom(1.5, 3.5).unwrap(), 0.0);
    }

    #[test]
    fn compensated_sum_recovers_cancelled_digits() {
        let terms = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(terms), 2.0);
        assert_ne!(terms.iter().sum::<f64>(), 2.0);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn beta_symmetric(x in 0.01f64..40.0, y in 0.01f64..40.0) {
                prop_assert_eq!(beta(x, y).unwrap(), beta(y, x).unwrap());
            }

            #[test]
            fn signed_log_product(x in -1e3f64..1e3, y in -1e3f64..1e3) {
                prop_assume!(x.abs() > 1e-6 && y.abs() > 1e-6);
                let p = SignedLogValue::from_f64(x) * SignedLogValue::from_f64(y);
                prop_assert!((p.to_f64() - x * y).abs() <= 1e-13 * (x * y).abs());
                let q = SignedLogValue::from_f64(x) / SignedLogValue::from_f64(y);
                prop_assert!((q.to_f64() - x / y).abs() <= 1e-13 * (x / y).abs());
            }
        }
    }
}
