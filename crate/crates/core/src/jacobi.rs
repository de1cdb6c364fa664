//! Orthonormal Jacobi polynomials on a finite interval.
//!
//! The basis on `[a, b]` with weight `ω(x) = (x−a)^β (b−x)^γ` is normalized
//! so that `∫ p_m p_n ω dx = δ_mn` and every `p_n` has a positive leading
//! coefficient. With the Rodrigues form
//! `y_n = (x−a)^{−β}(b−x)^{−γ} dⁿ/dxⁿ[(x−a)^{n+β}(b−x)^{n+γ}]`, whose leading
//! coefficient has sign `(−1)^n`, this is `p_n = δ_n y_n` with the sign of
//! `δ_n` equal to `(−1)^n`.
//!
//! Values come from the three-term recurrence; the Rodrigues sums are used
//! only for endpoint derivatives and the Taylor data `𝔠_n^{(k)}`.

use serde::{Deserialize, Serialize};
use crate::dd::Dd;

use crate::error::{Error, Result};
use crate::special::{
    beta as beta_fn, compensated_sum, ln_factorial, ln_rising, log_gamma_signed, rising_dd,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidBasis(format!(
                "interval requires finite a < b, got [{a}, {b}]"
            )));
        }
        Ok(Interval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// The reflection x ↦ a + b − x.
    pub fn reflect(&self, x: f64) -> f64 {
        self.a + self.b - x
    }
}

/// Which end of the interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    Left,
    Right,
}

/// Jacobi basis on `[a, b]` with left exponent `beta` and right exponent `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiBasis {
    interval: Interval,
    beta: f64,
    gamma: f64,
}

impl JacobiBasis {
    pub fn new(a: f64, b: f64, beta: f64, gamma: f64) -> Result<Self> {
        let interval = Interval::new(a, b)?;
        Self::on(interval, beta, gamma)
    }

    pub fn on(interval: Interval, beta: f64, gamma: f64) -> Result<Self> {
        if !(beta > -1.0 && gamma > -1.0) {
            return Err(Error::InvalidBasis(format!(
                "weight exponents must exceed -1, got beta={beta}, gamma={gamma}"
            )));
        }
        if beta + gamma + 1.0 < -1e-14 {
            return Err(Error::InvalidBasis(format!(
                "beta + gamma + 1 < 0 is not supported (beta={beta}, gamma={gamma})"
            )));
        }
        Ok(JacobiBasis {
            interval,
            beta,
            gamma,
        })
    }

    pub fn legendre(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, 0.0, 0.0)
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn a(&self) -> f64 {
        self.interval.a
    }

    pub fn b(&self) -> f64 {
        self.interval.b
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn is_ultraspherical(&self) -> bool {
        self.beta == self.gamma
    }

    /// Same interval with the weight exponents exchanged; the image of this
    /// basis under x ↦ a + b − x.
    pub fn swapped(&self) -> JacobiBasis {
        JacobiBasis {
            interval: self.interval,
            beta: self.gamma,
            gamma: self.beta,
        }
    }

    pub fn weight(&self, x: f64) -> f64 {
        (x - self.a()).powf(self.beta) * (self.b() - x).powf(self.gamma)
    }

    /// ∫ ω dx = (b−a)^{β+γ+1} B(β+1, γ+1).
    pub fn weight_mass(&self) -> f64 {
        let b = beta_fn(self.beta + 1.0, self.gamma + 1.0).expect("exponents > -1");
        (b.logmag() + (self.beta + self.gamma + 1.0) * self.interval.length().ln()).exp()
    }

    fn check_point(&self, x: f64) -> Result<()> {
        if self.interval.contains(x) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "x = {x} outside [{}, {}]",
                self.a(),
                self.b()
            )))
        }
    }

    // Reference interval [-1, 1]: weight (1−t)^γ (1+t)^β.

    pub(crate) fn to_reference(&self, x: f64) -> f64 {
        (2.0 * x - self.a() - self.b()) / self.interval.length()
    }

    pub(crate) fn from_reference(&self, t: f64) -> f64 {
        self.a() + 0.5 * self.interval.length() * (1.0 + t)
    }

    /// Diagonal entry a_n of the orthonormal Jacobi matrix on [-1, 1].
    pub(crate) fn recurrence_diag(&self, n: usize) -> f64 {
        let (ra, lb) = (self.gamma, self.beta);
        let s = ra + lb;
        if n == 0 {
            return (lb - ra) / (s + 2.0);
        }
        let nn = 2.0 * n as f64 + s;
        (lb * lb - ra * ra) / (nn * (nn + 2.0))
    }

    /// Off-diagonal entry b_n (coupling n−1 and n), n ≥ 1.
    pub(crate) fn recurrence_offdiag(&self, n: usize) -> f64 {
        debug_assert!(n >= 1);
        let (ra, lb) = (self.gamma, self.beta);
        let s = ra + lb;
        if n == 1 {
            let v = 4.0 * (1.0 + ra) * (1.0 + lb) / ((2.0 + s).powi(2) * (3.0 + s));
            return v.sqrt();
        }
        let nf = n as f64;
        let nn = 2.0 * nf + s;
        let v = 4.0 * nf * (nf + ra) * (nf + lb) * (nf + s) / (nn * nn * (nn + 1.0) * (nn - 1.0));
        v.sqrt()
    }

    /// p_0 on the reference interval: 1/√(∫(1−t)^γ(1+t)^β dt).
    fn reference_p0(&self) -> f64 {
        let s = self.beta + self.gamma + 1.0;
        let b = beta_fn(self.beta + 1.0, self.gamma + 1.0).expect("exponents > -1");
        (-0.5 * (s * std::f64::consts::LN_2 + b.logmag())).exp()
    }

    /// Factor mapping reference orthonormal polynomials to [a, b].
    fn interval_scale(&self) -> f64 {
        (2.0 / self.interval.length()).powf(0.5 * (self.beta + self.gamma + 1.0))
    }

    /// Values p_0(x), ..., p_{n_max}(x).
    pub fn eval_all(&self, n_max: usize, x: f64) -> Result<Vec<f64>> {
        self.check_point(x)?;
        Ok(self.eval_all_unchecked(n_max, x))
    }

    pub(crate) fn eval_all_unchecked(&self, n_max: usize, x: f64) -> Vec<f64> {
        let t = self.to_reference(x);
        let mut out = Vec::with_capacity(n_max + 1);
        let p0 = self.reference_p0();
        out.push(p0);
        if n_max >= 1 {
            out.push((t - self.recurrence_diag(0)) * p0 / self.recurrence_offdiag(1));
        }
        for j in 1..n_max {
            let next = ((t - self.recurrence_diag(j)) * out[j]
                - self.recurrence_offdiag(j) * out[j - 1])
                / self.recurrence_offdiag(j + 1);
            out.push(next);
        }
        let scale = self.interval_scale();
        out.iter_mut().for_each(|v| *v *= scale);
        out
    }

    /// Orthonormal polynomial p_n at x.
    pub fn eval_pn(&self, n: usize, x: f64) -> Result<f64> {
        Ok(self.eval_all(n, x)?[n])
    }

    /// k-th derivative of p_n at x, by differentiating the recurrence.
    pub fn eval_pn_derivative(&self, n: usize, k: usize, x: f64) -> Result<f64> {
        self.check_point(x)?;
        if k > n {
            return Ok(0.0);
        }
        let t = self.to_reference(x);
        // rows[d][j] = d-th t-derivative of the reference q_j
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
        for d in 0..=k {
            let mut row = vec![0.0; n + 1];
            row[0] = if d == 0 { self.reference_p0() } else { 0.0 };
            for j in 0..n {
                let prev = if j == 0 { 0.0 } else { row[j - 1] };
                let lower = if d == 0 { 0.0 } else { rows[d - 1][j] };
                let b_j = if j == 0 { 0.0 } else { self.recurrence_offdiag(j) };
                row[j + 1] = ((t - self.recurrence_diag(j)) * row[j] + d as f64 * lower
                    - b_j * prev)
                    / self.recurrence_offdiag(j + 1);
            }
            rows.push(row);
        }
        let chain = (2.0 / self.interval.length()).powi(k as i32);
        Ok(rows[k][n] * self.interval_scale() * chain)
    }

    /// ln of the positive normalization factor
    /// √((β+γ+2n+1)Γ(β+γ+n+1) / (n! Γ(β+n+1) Γ(γ+n+1))).
    pub(crate) fn ln_norm_factor(&self, n: usize) -> f64 {
        let (b, g) = (self.beta, self.gamma);
        let s = b + g + 1.0;
        let lg = |x: f64| log_gamma_signed(x).expect("argument > 0").logmag();
        if n == 0 {
            if s.abs() < 1e-14 {
                return -0.5 * (lg(b + 1.0) + lg(g + 1.0));
            }
            // (β+γ+1)Γ(β+γ+1) = Γ(β+γ+2)
            return 0.5 * (lg(s + 1.0) - lg(b + 1.0) - lg(g + 1.0));
        }
        let nf = n as f64;
        0.5 * ((s + 2.0 * nf).ln() + lg(s + nf) - ln_factorial(n) - lg(b + nf + 1.0)
            - lg(g + nf + 1.0))
    }

    /// The normalization multiplier δ_n, carrying the sign (−1)^n.
    pub fn delta_n(&self, n: usize) -> f64 {
        let s = self.beta + self.gamma + 1.0;
        if n == 0 && s.abs() < 1e-14 {
            let lg = |x: f64| log_gamma_signed(x).expect("argument > 0").logmag();
            return (-0.5 * (lg(self.beta + 1.0) + lg(self.gamma + 1.0))).exp();
        }
        let mag = (self.ln_norm_factor(n) - (n as f64 + 0.5 * s) * self.interval.length().ln())
            .exp();
        if n.is_multiple_of(2) {
            mag
        } else {
            -mag
        }
    }

    /// Closed endpoint sum Σ_i C(n,i) binom(n+β,n−i) binom(n+γ,i) C(k,i) binom(n−i,k−i) i!
    /// of the left-endpoint formula, with `(lb, rg)` playing the roles of (β, γ).
    /// Returned as a natural log (the sum is positive).
    fn ln_endpoint_sum(n: usize, k: usize, lb: f64, rg: f64) -> f64 {
        let nf = n as f64;
        let lg = |x: f64| log_gamma_signed(x).expect("argument > 0").logmag();
        let ln_choose = |p: usize, q: usize| ln_factorial(p) - ln_factorial(q) - ln_factorial(p - q);
        let logs: Vec<f64> = (0..=k.min(n))
            .map(|i| {
                let fi = i as f64;
                ln_choose(n, i)
                    + (lg(nf + lb + 1.0) - lg(lb + fi + 1.0))
                    + (lg(nf + rg + 1.0) - lg(nf + rg - fi + 1.0))
                    + ln_choose(k, i)
                    + (ln_factorial(n - i) - ln_factorial(n - k))
                    + ln_factorial(i)
            })
            .collect();
        let shift = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        shift + compensated_sum(logs.iter().map(|l| (l - shift).exp())).ln()
    }

    /// Taylor data 𝔠_n^{(k)}(β, γ) = (−1)^{n+k} p_n^{(k)}(a) (b−a)^k.
    pub fn taylor_coeff(&self, n: usize, k: usize) -> Result<f64> {
        if k > n {
            return Err(Error::Index(format!("taylor_coeff needs k <= n, got k={k}, n={n}")));
        }
        // 𝔠 = (−1)^n δ_n (b−a)^n S = |δ_n| (b−a)^n S. The k-dependent part of S
        // is a ratio of rising factorials; keeping it exact leaves a single
        // rounded factor shared by every k, so alternating Taylor sums built
        // from these values do not accumulate independent errors.
        Ok(self.ln_taylor_scale(n).exp() * f64::from(self.taylor_rational_dd(n, k)))
    }

    /// p_n^{(k)} at an endpoint, from the closed Rodrigues sums.
    pub fn endpoint_derivative(&self, n: usize, k: usize, end: Endpoint) -> Result<f64> {
        if k > n {
            return Err(Error::Index(format!(
                "endpoint_derivative needs k <= n, got k={k}, n={n}"
            )));
        }
        let delta = self.delta_n(n);
        let ln_len = self.interval.length().ln();
        let ln_scale = (n as f64 - k as f64) * ln_len;
        match end {
            Endpoint::Left => {
                // y_n^{(k)}(a) = (−1)^k (b−a)^{n−k} S(β, γ)
                let y = (ln_scale + Self::ln_endpoint_sum(n, k, self.beta, self.gamma)).exp();
                let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                Ok(delta * sign * y)
            }
            Endpoint::Right => {
                // y_n^{(k)}(b) = (−1)^n (b−a)^{n−k} S(γ, β)
                let y = (ln_scale + Self::ln_endpoint_sum(n, k, self.gamma, self.beta)).exp();
                let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                Ok(delta * sign * y)
            }
        }
    }

    /// ln of the factor `λ_n` in 𝔠_n^{(k)} = λ_n · T_{nk}, where T_{nk} is the
    /// rational part returned by [`Self::taylor_rational_dd`].
    pub(crate) fn ln_taylor_scale(&self, n: usize) -> f64 {
        let s = self.beta + self.gamma + 1.0;
        -0.5 * s * self.interval.length().ln()
            + self.ln_norm_factor(n)
            + ln_rising(self.beta + 1.0, n)
            + ln_rising(self.gamma + 1.0, n)
    }

    /// T_{nk} = n!/(n−k)! Σ_i C(k,i) / ((β+1)_i (γ+1)_{n−i}) in double-double.
    pub(crate) fn taylor_rational_dd(&self, n: usize, k: usize) -> Dd {
        let mut falling = Dd::from(1.0);
        for j in 0..k {
            falling *= (n - j) as f64;
        }
        let mut binom = Dd::from(1.0);
        let mut sum = Dd::from(0.0);
        for i in 0..=k {
            if i > 0 {
                binom = binom * ((k - i + 1) as f64) / (i as f64);
            }
            sum += binom / (rising_dd(self.beta + 1.0, i) * rising_dd(self.gamma + 1.0, n - i));
        }
        falling * sum
    }
}

/// Pollard's basis window: the Jacobi system is a basis of L_p(ω) for `lower < p < upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisRange {
    pub lower: f64,
    pub upper: f64,
}

impl BasisRange {
    pub fn contains(&self, p: f64) -> bool {
        self.lower < p && p < self.upper
    }
}

pub fn basis_range(beta: f64, gamma: f64) -> Result<BasisRange> {
    if beta < -0.5 || gamma < -0.5 {
        return Err(Error::domain(format!(
            "basis_range requires beta, gamma >= -1/2, got ({beta}, {gamma})"
        )));
    }
    let upper_term = |t: f64| {
        let den = 2.0 * t + 1.0;
        if den == 0.0 {
            f64::INFINITY
        } else {
            4.0 * (t + 1.0) / den
        }
    };
    let lower_term = |t: f64| 4.0 * (t + 1.0) / (2.0 * t + 3.0);
    Ok(BasisRange {
        lower: lower_term(beta).max(lower_term(gamma)),
        upper: upper_term(beta).min(upper_term(gamma)),
    })
}

/// Weight admissibility window of the L_p boundedness lemma.
pub fn lemma1_admissible(beta: f64, gamma: f64, p: f64) -> bool {
    let in_box = |t: f64| (-0.5..=0.5).contains(&t);
    if !(p > 1.0 && in_box(beta) && in_box(gamma)) {
        return false;
    }
    basis_range(beta, gamma).is_ok_and(|r| r.contains(p))
}

/// True when some p > 1 satisfies [`lemma1_admissible`].
pub fn basis_is_admissible(basis: &JacobiBasis) -> bool {
    let in_box = |t: f64| (-0.5..=0.5).contains(&t);
    in_box(basis.beta()) && in_box(basis.gamma())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn legendre_sym() -> JacobiBasis {
        JacobiBasis::legendre(-1.0, 1.0).unwrap()
    }

    /// δ_n · y_n(x) from the Leibniz expansion of the Rodrigues formula.
    fn rodrigues_value(basis: &JacobiBasis, n: usize, x: f64) -> f64 {
        let (a, b) = (basis.a(), basis.b());
        let (be, ga) = (basis.beta(), basis.gamma());
        let nf = n as f64;
        let lg = |x: f64| log_gamma_signed(x).unwrap().logmag();
        let mut y = 0.0;
        for i in 0..=n {
            let fi = i as f64;
            let choose = (ln_factorial(n) - ln_factorial(i) - ln_factorial(n - i)).exp();
            let b1 = (lg(nf + be + 1.0) - lg(be + fi + 1.0)).exp();
            let b2 = (lg(nf + ga + 1.0) - lg(nf + ga - fi + 1.0)).exp();
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            y += sign * choose * b1 * b2 * (x - a).powi(i as i32) * (b - x).powi((n - i) as i32);
        }
        basis.delta_n(n) * y
    }

    #[test]
    fn delta_zero_values() {
        assert_relative_eq!(legendre_sym().delta_n(0), 1.0 / 2f64.sqrt(), max_relative = 1e-15);
        let unit = JacobiBasis::legendre(0.0, 1.0).unwrap();
        assert_relative_eq!(unit.delta_n(0), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn delta_sign_alternates() {
        let basis = JacobiBasis::new(0.5, 3.0, 0.3, -0.2).unwrap();
        for n in 1..30 {
            let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(basis.delta_n(n).signum(), expected, "n={n}");
        }
    }

    #[test]
    fn delta_zero_special_case() {
        let basis = JacobiBasis::new(0.0, 2.0, -0.5, -0.5).unwrap();
        let expected = 1.0 / (std::f64::consts::PI.sqrt() * std::f64::consts::PI.sqrt()).sqrt();
        assert_relative_eq!(basis.delta_n(0), expected, max_relative = 1e-14);
        // p_0 is the constant 1/√(∫ω)
        let p0 = basis.eval_pn(0, 1.3).unwrap();
        assert_relative_eq!(p0, 1.0 / basis.weight_mass().sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn eval_small_degree_legendre() {
        let b = legendre_sym();
        assert_relative_eq!(b.eval_pn(0, 0.3).unwrap(), 1.0 / 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(b.eval_pn(1, 1.0).unwrap(), 1.5f64.sqrt(), max_relative = 1e-15);
        assert!(b.eval_pn(1, 1.0 + 1e-9).is_err());
    }

    #[test]
    fn recurrence_matches_rodrigues_sign_convention() {
        for basis in [
            JacobiBasis::new(0.0, 1.0, 0.0, 0.0).unwrap(),
            JacobiBasis::new(-1.0, 2.0, 0.5, -0.5).unwrap(),
            JacobiBasis::new(1.0, 4.0, 0.3, 0.7).unwrap(),
        ] {
            for n in 0..=8 {
                for &u in &[0.05, 0.31, 0.5, 0.77, 0.93] {
                    let x = basis.a() + u * (basis.b() - basis.a());
                    let rec = basis.eval_pn(n, x).unwrap();
                    let rod = rodrigues_value(&basis, n, x);
                    assert!(
                        (rec - rod).abs() <= 1e-10 * rod.abs().max(1e-3),
                        "n={n} x={x} rec={rec} rod={rod}"
                    );
                }
            }
        }
    }

    #[test]
    fn ultraspherical_parity() {
        let basis = JacobiBasis::new(-2.0, 3.0, 0.3, 0.3).unwrap();
        for n in 0..15 {
            for &x in &[-1.7, -0.2, 0.4, 2.9] {
                let lhs = basis.eval_pn(n, basis.interval().reflect(x)).unwrap();
                let rhs = if n % 2 == 0 { 1.0 } else { -1.0 } * basis.eval_pn(n, x).unwrap();
                assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0), "n={n}");
            }
        }
    }

    #[test]
    fn taylor_reconstruction() {
        for basis in [
            JacobiBasis::new(0.0, 1.0, 0.0, 0.0).unwrap(),
            JacobiBasis::new(-1.0, 1.0, 0.5, 0.5).unwrap(),
            JacobiBasis::new(0.0, 2.0, -0.5, 0.0).unwrap(),
        ] {
            let len = basis.b() - basis.a();
            for n in 0..=12 {
                let scale = basis.ln_taylor_scale(n).exp();
                for &u in &[0.0, 0.2, 0.5, 0.8, 1.0] {
                    let x = basis.a() + u * len;
                    // the monomial sum alternates; accumulate in double-double
                    let mut k_fact = Dd::from(1.0);
                    let mut exact = Dd::from(0.0);
                    let mut rounded = Dd::from(0.0);
                    let mut magnitude = 0.0;
                    let mut uk = Dd::from(1.0);
                    for k in 0..=n {
                        if k > 0 {
                            k_fact *= k as f64;
                            uk *= u;
                        }
                        let sign = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
                        exact += basis.taylor_rational_dd(n, k) * sign / k_fact * uk;
                        let c = basis.taylor_coeff(n, k).unwrap();
                        rounded += Dd::from(sign * c) / k_fact * uk;
                        magnitude += f64::from(Dd::from(c) / k_fact * uk);
                    }
                    let direct = basis.eval_pn(n, x).unwrap();
                    let exact = scale * f64::from(exact);
                    let rounded = f64::from(rounded);
                    assert!(
                        (exact - direct).abs() <= 1e-9 * direct.abs().max(1.0),
                        "n={n} x={x} err={}",
                        (exact - direct).abs()
                    );
                    // f64 Taylor data: rounding of each value is amplified by
                    // the cancellation in the alternating sum
                    let floor = 4.0 * f64::EPSILON * magnitude;
                    assert!(
                        (rounded - direct).abs() <= 1e-9 * direct.abs().max(1.0) + floor,
                        "n={n} x={x} err={} floor={floor}",
                        (rounded - direct).abs()
                    );
                }
            }
        }
    }

    #[test]
    fn taylor_zero_order_on_unit_legendre() {
        let unit = JacobiBasis::legendre(0.0, 1.0).unwrap();
        assert_relative_eq!(unit.taylor_coeff(0, 0).unwrap(), 1.0, max_relative = 1e-15);
        assert!(matches!(unit.taylor_coeff(2, 3), Err(Error::Index(_))));
    }

    #[test]
    fn taylor_coeff_matches_endpoint_closed_sum() {
        let basis = JacobiBasis::new(0.0, 3.0, 0.3, -0.4).unwrap();
        for n in 0..=20 {
            for k in 0..=n {
                let sign = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
                let closed = sign
                    * basis.endpoint_derivative(n, k, Endpoint::Left).unwrap()
                    * 3f64.powi(k as i32);
                let rational = basis.taylor_coeff(n, k).unwrap();
                assert_relative_eq!(rational, closed, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn taylor_right_endpoint_identity() {
        let basis = JacobiBasis::new(0.0, 2.0, 0.3, -0.2).unwrap();
        let len = 2.0f64;
        for n in 0..=10 {
            for k in 0..=n {
                let via_swap = basis.swapped().taylor_coeff(n, k).unwrap();
                let direct = basis.endpoint_derivative(n, k, Endpoint::Right).unwrap()
                    * len.powi(k as i32);
                assert_relative_eq!(via_swap, direct, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn endpoint_matches_values_and_finite_differences() {
        let b = legendre_sym();
        assert_relative_eq!(
            b.endpoint_derivative(1, 0, Endpoint::Left).unwrap(),
            b.eval_pn(1, -1.0).unwrap(),
            max_relative = 1e-14
        );

        let basis = JacobiBasis::new(0.0, 1.0, 0.25, -0.3).unwrap();
        let h = 1e-5;
        let x = 1.0 - 2.0 * h;
        // one-sided second difference at the right end, corrected to x = b by Taylor
        let f = |x: f64| basis.eval_pn(3, x).unwrap();
        let fd2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        let third = basis.eval_pn_derivative(3, 3, x).unwrap();
        let at_b = fd2 + third * 2.0 * h;
        let closed = basis.endpoint_derivative(3, 2, Endpoint::Right).unwrap();
        assert!((at_b - closed).abs() <= 1e-5 * closed.abs(), "{at_b} vs {closed}");
    }

    #[test]
    fn endpoint_highest_order_matches_leading_coefficient() {
        let basis = JacobiBasis::new(0.0, 2.0, 0.1, 0.4).unwrap();
        for n in 0..=10 {
            let dn = basis.eval_pn_derivative(n, n, 1.0).unwrap();
            let left = basis.endpoint_derivative(n, n, Endpoint::Left).unwrap();
            assert_relative_eq!(dn, left, max_relative = 1e-10);
            // 𝔠_n^{(n)} = p_n^{(n)} (b−a)^n since the sign factor is +1
            let c = basis.taylor_coeff(n, n).unwrap();
            assert_relative_eq!(c, dn * 2f64.powi(n as i32), max_relative = 1e-10);
        }
    }

    #[test]
    fn recurrence_derivative_against_finite_differences() {
        let basis = JacobiBasis::new(-1.0, 2.0, 0.5, 0.0).unwrap();
        let h = 1e-6;
        for n in 1..8 {
            let x = 0.37;
            let fd = (basis.eval_pn(n, x + h).unwrap() - basis.eval_pn(n, x - h).unwrap()) / (2.0 * h);
            let d = basis.eval_pn_derivative(n, 1, x).unwrap();
            assert!((fd - d).abs() <= 1e-6 * d.abs().max(1.0));
        }
    }

    #[test]
    fn degree_is_exact() {
        // (n+1)-th divided difference vanishes, n-th equals the leading coefficient
        let basis = JacobiBasis::new(0.0, 1.0, 0.2, 0.6).unwrap();
        for n in 0..=8 {
            let xs: Vec<f64> = (0..n + 2).map(|i| 0.05 + 0.9 * i as f64 / (n + 1) as f64).collect();
            let mut table: Vec<f64> = xs.iter().map(|&x| basis.eval_pn(n, x).unwrap()).collect();
            let mut nth = 0.0;
            for order in 1..=n + 1 {
                for i in 0..(xs.len() - order) {
                    table[i] = (table[i + 1] - table[i]) / (xs[i + order] - xs[i]);
                }
                if order == n {
                    nth = table[0];
                }
            }
            let lead = if n == 0 { basis.eval_pn(0, 0.5).unwrap() } else { nth };
            assert!(lead > 0.0, "leading coefficient must be positive, n={n}");
            assert!(table[0].abs() <= 1e-6 * lead.abs(), "n={n} residual {}", table[0]);
        }
    }

    #[test]
    fn basis_range_values() {
        let r = basis_range(0.0, 0.0).unwrap();
        assert_eq!(r.lower, 4.0 / 3.0);
        assert_eq!(r.upper, 4.0);
        let r = basis_range(-0.5, -0.5).unwrap();
        assert_eq!(r.lower, 1.0);
        assert_eq!(r.upper, f64::INFINITY);
        let r = basis_range(0.5, 0.5).unwrap();
        assert_eq!(r.lower, 1.5);
        assert_eq!(r.upper, 3.0);
        assert!(basis_range(-0.6, 0.0).is_err());
    }

    #[test]
    fn lemma1_cases() {
        assert!(lemma1_admissible(0.0, 0.0, 2.0));
        assert!(!lemma1_admissible(0.0, 0.0, 4.0));
        assert!(!lemma1_admissible(0.7, 0.0, 2.0));
    }

    #[test]
    fn invalid_bases_rejected() {
        assert!(JacobiBasis::new(1.0, 1.0, 0.0, 0.0).is_err());
        assert!(JacobiBasis::new(0.0, 1.0, -1.0, 0.0).is_err());
        assert!(JacobiBasis::new(0.0, 1.0, -0.8, -0.8).is_err());
        assert!(JacobiBasis::new(0.0, 1.0, -0.5, -0.5).is_ok());
    }
}
