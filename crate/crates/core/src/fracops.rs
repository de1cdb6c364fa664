//! Riemann–Liouville fractional integrals and derivatives: coefficient-space
//! application through the operational matrices, direct quadrature of the
//! defining integrals, and the closed forms for powers.
//!
//! ```text
//! I^α_{a+} f(x) = 1/Γ(α) ∫_a^x f(t) (x−t)^{α−1} dt
//! I^α_{b−} f(x) = 1/Γ(α) ∫_x^b f(t) (t−x)^{α−1} dt
//! D^α_{a+} f = d/dx I^{1−α}_{a+} f,   D^α_{b−} f = −d/dx I^{1−α}_{b−} f   (0 < α < 1)
//! ```

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::{basis_is_admissible, JacobiBasis};
use crate::opmatrix::{assemble_rect, OpMatrix};
use crate::quadrature::{gauss_jacobi, CoeffVector, QuadratureRule};
use crate::special::{gamma, log_gamma_signed, rgamma, CompensatedSum};

/// Which base point the operator integrates from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Base point a: I^α_{a+}, D^α_{a+}.
    Left,
    /// Base point b: I^α_{b−}, D^α_{b−}.
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

impl FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(Error::domain(format!("side must be 'left' or 'right', got '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    Integral,
    Derivative,
}

/// A fractional order α ∈ (0, 1) together with the operator kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracOrder {
    alpha: f64,
    kind: OrderKind,
}

impl FracOrder {
    pub fn new(alpha: f64, kind: OrderKind) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::OrderRange(format!("order must lie in (0, 1), got {alpha}")));
        }
        Ok(FracOrder { alpha, kind })
    }

    pub fn integral(alpha: f64) -> Result<Self> {
        Self::new(alpha, OrderKind::Integral)
    }

    pub fn derivative(alpha: f64) -> Result<Self> {
        Self::new(alpha, OrderKind::Derivative)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    /// +α for integrals, −α for derivatives (I^{−α} := D^α).
    pub fn signed(&self) -> f64 {
        match self.kind {
            OrderKind::Integral => self.alpha,
            OrderKind::Derivative => -self.alpha,
        }
    }
}

/// `coefficient · (x−a)^exponent` on the left, `coefficient · (b−x)^exponent` on the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerTerm {
    pub coefficient: f64,
    pub exponent: f64,
}

/// Image of (x−a)^μ (left) or (b−x)^μ (right) under the operator.
pub fn power_closed_form(mu: f64, order: FracOrder, side: Side) -> Result<PowerTerm> {
    // Both sides share the same coefficient: the reflection x ↦ a+b−x maps one onto the other.
    let _ = side;
    power_closed_form_signed(mu, order.signed())
}

/// Closed form for a signed order s: Γ(μ+1)/Γ(μ+1+s) · (·)^{μ+s}. Positive s
/// integrates, negative s differentiates; any real s is accepted, e.g. s = 1 is
/// the ordinary antiderivative. The coefficient is exactly zero when μ+1+s is
/// a non-positive integer.
pub fn power_closed_form_signed(mu: f64, s: f64) -> Result<PowerTerm> {
    if !mu.is_finite() || !s.is_finite() {
        return Err(Error::domain("power and order must be finite"));
    }
    if mu <= -1.0 {
        return Err(Error::domain(format!(
            "power (x-a)^{mu} is not integrable at the base point"
        )));
    }
    let lg = log_gamma_signed(mu + 1.0)?;
    let r = rgamma(mu + 1.0 + s);
    let coefficient = if r == 0.0 {
        0.0
    } else {
        // Γ(μ+1)/Γ(μ+1+s) in log form to stay finite for large μ
        let lr = log_gamma_signed(mu + 1.0 + s)?;
        f64::from(lg.sign() * lr.sign()) * (lg.logmag() - lr.logmag()).exp()
    };
    Ok(PowerTerm { coefficient, exponent: mu + s })
}

const PANEL_POINTS: usize = 20;
const GRADED_LEVELS: usize = 44;

fn legendre_unit_rule() -> &'static QuadratureRule {
    static RULE: OnceLock<QuadratureRule> = OnceLock::new();
    RULE.get_or_init(|| {
        let b = JacobiBasis::legendre(0.0, 1.0).expect("valid basis");
        gauss_jacobi(&b, PANEL_POINTS).expect("valid order")
    })
}

/// ∫_0^1 g(u) u^{α−1} du with a Jacobi rule on [0, 1/2] and panels graded
/// geometrically toward u = 1, where g may carry an endpoint singularity.
fn kernel_integral<G: Fn(f64) -> f64>(g: G, alpha: f64) -> Result<f64> {
    let head_basis = JacobiBasis::new(0.0, 0.5, alpha - 1.0, 0.0)?;
    let head = gauss_jacobi(&head_basis, PANEL_POINTS)?;
    let mut acc = CompensatedSum::new();
    for (u, w) in head.nodes().iter().zip(head.weights()) {
        acc.add(w * g(*u));
    }
    let leg = legendre_unit_rule();
    let mut lo = 0.5;
    for level in 0..=GRADED_LEVELS {
        let hi = if level == GRADED_LEVELS { 1.0 } else { 1.0 - 0.5f64.powi(level as i32 + 2) };
        let h = hi - lo;
        for (t, w) in leg.nodes().iter().zip(leg.weights()) {
            let u = lo + h * t;
            acc.add(h * w * g(u) * u.powf(alpha - 1.0));
        }
        lo = hi;
    }
    Ok(acc.value())
}

/// I^α of f at x by quadrature of the defining integral (α > 0, any order < 2
/// in practice). The substitution t = x ∓ |x−base|·u isolates the kernel
/// singularity at u = 0 and any endpoint singularity of f at u = 1.
fn rl_integral<F: Fn(f64) -> f64>(f: &F, alpha: f64, side: Side, x: f64, basis: &JacobiBasis) -> Result<f64> {
    let base = match side {
        Side::Left => basis.a(),
        Side::Right => basis.b(),
    };
    let h = x - base;
    if h == 0.0 {
        return Ok(0.0);
    }
    let raw = kernel_integral(|u| f(x - h * u), alpha)?;
    Ok(h.abs().powf(alpha) * raw / gamma(alpha)?)
}

fn check_point(x: f64, basis: &JacobiBasis) -> Result<()> {
    if !basis.interval().contains(x) {
        return Err(Error::domain(format!(
            "evaluation point {x} outside [{}, {}]",
            basis.a(),
            basis.b()
        )));
    }
    Ok(())
}

/// Direct quadrature of the defining integral. Derivatives are obtained by
/// numerically differentiating I^{1−α} f (a fourth-order finite-difference
/// stencil), which loses several digits; prefer
/// [`rl_quadrature_with_derivative`] when f′ is available.
pub fn rl_quadrature<F: Fn(f64) -> f64>(
    f: F,
    order: FracOrder,
    side: Side,
    x: f64,
    basis: &JacobiBasis,
) -> Result<f64> {
    check_point(x, basis)?;
    match order.kind() {
        OrderKind::Integral => rl_integral(&f, order.alpha(), side, x, basis),
        OrderKind::Derivative => {
            log::warn!("fractional derivative by finite differences; expect ~1e-8 relative accuracy");
            let g = |y: f64| rl_integral(&f, 1.0 - order.alpha(), side, y, basis);
            let d = finite_difference(&g, x, basis)?;
            Ok(match side {
                Side::Left => d,
                Side::Right => -d,
            })
        }
    }
}

/// Like [`rl_quadrature`], but derivatives use the first derivative `df`
/// through [`smooth_derivative`] instead of finite differences.
pub fn rl_quadrature_with_derivative<F, G>(
    f: F,
    df: G,
    order: FracOrder,
    side: Side,
    x: f64,
    basis: &JacobiBasis,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    match order.kind() {
        OrderKind::Integral => rl_quadrature(f, order, side, x, basis),
        OrderKind::Derivative => smooth_derivative(f, df, order, side, x, basis),
    }
}

/// Fourth-order derivative stencil kept inside [a, b].
fn finite_difference<G: Fn(f64) -> Result<f64>>(g: &G, x: f64, basis: &JacobiBasis) -> Result<f64> {
    let (a, b) = (basis.a(), basis.b());
    let len = b - a;
    let room_left = x - a;
    let room_right = b - x;
    let h0 = 2e-3 * len;
    if room_left >= 2.0 * h0 && room_right >= 2.0 * h0 {
        let h = h0;
        return Ok((-g(x + 2.0 * h)? + 8.0 * g(x + h)? - 8.0 * g(x - h)? + g(x - 2.0 * h)?) / (12.0 * h));
    }
    if room_left >= room_right {
        let h = h0.min(room_left / 4.0);
        if h <= 0.0 {
            return Err(Error::domain("no room for a difference stencil"));
        }
        Ok((25.0 * g(x)? - 48.0 * g(x - h)? + 36.0 * g(x - 2.0 * h)? - 16.0 * g(x - 3.0 * h)?
            + 3.0 * g(x - 4.0 * h)?)
            / (12.0 * h))
    } else {
        let h = h0.min(room_right / 4.0);
        if h <= 0.0 {
            return Err(Error::domain("no room for a difference stencil"));
        }
        Ok((-25.0 * g(x)? + 48.0 * g(x + h)? - 36.0 * g(x + 2.0 * h)? + 16.0 * g(x + 3.0 * h)?
            - 3.0 * g(x + 4.0 * h)?)
            / (12.0 * h))
    }
}

/// D^α f(x) for differentiable f, 0 < α < 1:
///
/// ```text
/// D^α_{a+} f(x) = f(a)(x−a)^{−α}/Γ(1−α) + I^{1−α}_{a+}[f′](x)
/// D^α_{b−} f(x) = f(b)(b−x)^{−α}/Γ(1−α) − I^{1−α}_{b−}[f′](x)
/// ```
///
/// At the base point with f(base) ≠ 0 the value is infinite and returned as such.
pub fn smooth_derivative<F, G>(
    f: F,
    df: G,
    order: FracOrder,
    side: Side,
    x: f64,
    basis: &JacobiBasis,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    check_point(x, basis)?;
    let al = order.alpha();
    let (base, sign) = match side {
        Side::Left => (basis.a(), 1.0),
        Side::Right => (basis.b(), -1.0),
    };
    let fb = f(base);
    let dist = (x - base).abs();
    let boundary = if fb == 0.0 {
        0.0
    } else {
        fb * dist.powf(-al) / gamma(1.0 - al)?
    };
    let integral = rl_integral(&df, 1.0 - al, side, x, basis)?;
    Ok(boundary + sign * integral)
}

/// Signed coefficient-space application: out = M·ψ with M the
/// (n_out+1)×len(ψ) operational matrix of signed order `alpha` ∈ (−1, 1).
/// α = 0 is the exact identity (truncated or zero-padded to `n_out`).
pub fn apply_signed(psi: &CoeffVector, alpha: f64, side: Side, n_out: usize) -> Result<CoeffVector> {
    let basis = psi.basis();
    if !basis_is_admissible(basis) {
        log::warn!(
            "basis (beta={}, gamma={}) is outside the Lemma 1 admissibility window",
            basis.beta(),
            basis.gamma()
        );
    }
    if alpha == 0.0 {
        // I^0 is the identity; skip the matrix so the output is exact
        let mut c = psi.coeffs().to_vec();
        c.resize(n_out + 1, 0.0);
        return CoeffVector::new(*basis, c);
    }
    let m = assemble_rect(basis, alpha, side, n_out + 1, psi.len())?;
    apply_matrix(&m, psi)
}

/// f = T ψ in coefficient space, truncated to degree `n_out`.
pub fn apply_coeff(psi: &CoeffVector, order: FracOrder, side: Side, n_out: usize) -> Result<CoeffVector> {
    apply_signed(psi, order.signed(), side, n_out)
}

/// Applies a pre-assembled matrix (its basis must match ψ's).
pub fn apply_matrix(m: &OpMatrix, psi: &CoeffVector) -> Result<CoeffVector> {
    psi.ensure_same_basis(m.basis())?;
    CoeffVector::new(*psi.basis(), m.apply(psi.coeffs())?)
}

/// Heuristic size of the truncation error of T ψ: the contribution
/// Σ |ψ_n| max_m |M_{mn}| of the upper half of ψ's coefficients. When ψ is
/// resolved this is small; it is not a bound.
pub fn truncation_tail_estimate(m: &OpMatrix, psi: &CoeffVector) -> f64 {
    let len = psi.len().min(m.cols());
    let start = len / 2;
    (start..len)
        .map(|n| {
            let col = (0..m.rows()).map(|r| m.entry(r, n).abs()).fold(0.0, f64::max);
            psi.coeffs()[n].abs() * col
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opmatrix::assemble;
    use crate::quadrature::{analyze, synthesize};
    use proptest::prelude::*;

    fn unit() -> JacobiBasis {
        JacobiBasis::legendre(0.0, 1.0).unwrap()
    }

    #[test]
    fn power_examples() {
        let half = FracOrder::integral(0.5).unwrap();
        let t = power_closed_form(0.0, half, Side::Left).unwrap();
        assert!((t.coefficient - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-15);
        assert_eq!(t.exponent, 0.5);
        let t = power_closed_form_signed(1.0, 1.0).unwrap();
        assert!((t.coefficient - 0.5).abs() < 1e-15 && t.exponent == 2.0);
        // D^α of (x−a)^{α−1} vanishes
        let d = FracOrder::derivative(0.3).unwrap();
        let t = power_closed_form(-0.7, d, Side::Left).unwrap();
        assert_eq!(t.coefficient, 0.0);
        assert!(power_closed_form(-1.0, half, Side::Left).is_err());
    }

    #[test]
    fn order_validation() {
        assert!(FracOrder::integral(0.0).is_err());
        assert!(FracOrder::derivative(1.0).is_err());
        assert_eq!(FracOrder::derivative(0.25).unwrap().signed(), -0.25);
        assert_eq!("right".parse::<Side>().unwrap(), Side::Right);
        assert!("up".parse::<Side>().is_err());
    }

    #[test]
    fn quadrature_matches_power_rule() {
        let b = JacobiBasis::legendre(-1.0, 2.0).unwrap();
        for &al in &[0.25, 0.5, 0.75] {
            let o = FracOrder::integral(al).unwrap();
            for &mu in &[0.0, 1.0, 2.5, 0.3] {
                let t = power_closed_form(mu, o, Side::Left).unwrap();
                for &x in &[-0.9, 0.0, 1.3, 2.0] {
                    let got = rl_quadrature(|s| (s + 1.0).powf(mu), o, Side::Left, x, &b).unwrap();
                    let want = t.coefficient * (x + 1.0).powf(t.exponent);
                    assert!((got - want).abs() < 1e-12 * want.abs().max(1.0), "{al} {mu} {x}: {got} vs {want}");
                    let got_r = rl_quadrature(|s| (2.0 - s).powf(mu), o, Side::Right, x, &b).unwrap();
                    let want_r = t.coefficient * (2.0 - x).powf(t.exponent);
                    assert!((got_r - want_r).abs() < 1e-12 * want_r.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn smooth_derivative_on_powers() {
        let b = unit();
        let d = FracOrder::derivative(0.5).unwrap();
        let fs: [(fn(f64) -> f64, fn(f64) -> f64, f64); 3] = [
            (|_| 1.0, |_| 0.0, 0.0),
            (|t| t, |_| 1.0, 1.0),
            (|t| t * t, |t| 2.0 * t, 2.0),
        ];
        for (f, df, mu) in fs {
            let pc = power_closed_form(mu, d, Side::Left).unwrap();
            for i in 1..=10 {
                let x = i as f64 / 10.0;
                let got = smooth_derivative(f, df, d, Side::Left, x, &b).unwrap();
                let want = pc.coefficient * x.powf(pc.exponent);
                assert!((got - want).abs() < 1e-9, "{mu} {x}: {got} vs {want}");
            }
        }
        // at the base point with f(a) ≠ 0 the derivative is singular
        let v = smooth_derivative(|_| 1.0, |_| 0.0, d, Side::Left, 0.0, &b).unwrap();
        assert!(v.is_infinite());
    }

    #[test]
    fn finite_difference_derivative_is_close() {
        let b = unit();
        let d = FracOrder::derivative(0.4).unwrap();
        let pc = power_closed_form(2.0, d, Side::Left).unwrap();
        for &x in &[0.1, 0.5, 0.999, 1.0] {
            let got = rl_quadrature(|t| t * t, d, Side::Left, x, &b).unwrap();
            let want = pc.coefficient * x.powf(pc.exponent);
            assert!((got - want).abs() < 1e-7, "{x}: {got} vs {want}");
        }
        let got = rl_quadrature(|t| (1.0 - t).powi(2), d, Side::Right, 0.3, &b).unwrap();
        assert!((got - pc.coefficient * 0.7f64.powf(pc.exponent)).abs() < 1e-7);
    }

    #[test]
    fn zero_order_application_is_identity() {
        let b = JacobiBasis::new(-1.0, 1.0, 0.5, 0.0).unwrap();
        let psi = CoeffVector::new(b, vec![0.3, -1.0, 0.25, 2.0]).unwrap();
        let out = apply_signed(&psi, 0.0, Side::Left, 3).unwrap();
        assert_eq!(out.coeffs(), psi.coeffs());
        // the shortcut agrees with the assembled order-zero matrix
        let via_matrix = assemble(&b, 0.0, Side::Left, 3).unwrap().apply(psi.coeffs()).unwrap();
        for (x, y) in via_matrix.iter().zip(psi.coeffs()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_one_half_integral() {
        // I^{1/2} 1 = 2√x/√π on [0,1]; its first coefficient is 4/(3√π)
        let psi = CoeffVector::unit(unit(), 0, 1);
        let out = apply_coeff(&psi, FracOrder::integral(0.5).unwrap(), Side::Left, 40).unwrap();
        assert!((out.coeffs()[0] - 4.0 / (3.0 * std::f64::consts::PI.sqrt())).abs() < 1e-12);
        let want = |x: f64| 2.0 * x.sqrt() / std::f64::consts::PI.sqrt();
        // √x converges slowly in Legendre coefficients; away from 0 the error is small
        assert!((synthesize(&out, 0.6).unwrap() - want(0.6)).abs() < 1e-3);
    }

    #[test]
    fn mismatched_matrix_basis_is_rejected() {
        let m = assemble(&unit(), 0.5, Side::Left, 3).unwrap();
        let other = JacobiBasis::legendre(-1.0, 1.0).unwrap();
        let psi = CoeffVector::new(other, vec![1.0]).unwrap();
        assert!(matches!(apply_matrix(&m, &psi), Err(Error::BasisMismatch(_))));
    }

    #[test]
    fn tail_estimate_reflects_resolution() {
        let b = JacobiBasis::legendre(-1.0, 1.0).unwrap();
        let m = assemble(&b, 0.5, Side::Left, 15).unwrap();
        let smooth = analyze(|x: f64| x.exp(), &b, 15).unwrap();
        let rough = analyze(|x: f64| x.abs(), &b, 15).unwrap();
        let (ts, tr) = (truncation_tail_estimate(&m, &smooth), truncation_tail_estimate(&m, &rough));
        assert!(ts < 1e-6, "{ts}");
        assert!(tr > 1e-3, "{tr}");
        assert!(tr > 1e4 * ts);
    }

    #[test]
    fn right_integral_by_quadrature_equals_reflected_left() {
        let b = JacobiBasis::legendre(-1.0, 2.0).unwrap();
        let f = |t: f64| (t * 1.7).sin() + t * t;
        let o = FracOrder::integral(0.35).unwrap();
        for &x in &[-0.5, 0.4, 1.9] {
            let r = rl_quadrature(f, o, Side::Right, x, &b).unwrap();
            let l = rl_quadrature(|t| f(b.interval().reflect(t)), o, Side::Left, b.interval().reflect(x), &b)
                .unwrap();
            assert!((r - l).abs() < 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn coefficient_image_matches_quadrature(
            coeffs in proptest::collection::vec(-1.0f64..1.0, 1..9),
            al in 0.1f64..0.9,
            x in 0.05f64..1.0,
            right in any::<bool>(),
        ) {
            let b = JacobiBasis::new(0.0, 1.0, 0.0, 0.0).unwrap();
            let side = if right { Side::Right } else { Side::Left };
            let psi = CoeffVector::new(b, coeffs).unwrap();
            let o = FracOrder::integral(al).unwrap();
            let out = apply_coeff(&psi, o, side, 60).unwrap();
            let q = rl_quadrature(|t| synthesize(&psi, t).unwrap(), o, side, x, &b).unwrap();
            let s = synthesize(&out, x).unwrap();
            // the image carries a fractional power at the base point, so its
            // 61-term expansion is accurate to a few 1e-4 away from it
            prop_assert!((s - q).abs() < 5e-3, "{} vs {}", s, q);
        }

        #[test]
        fn application_is_linear(
            u in proptest::collection::vec(-1.0f64..1.0, 6),
            v in proptest::collection::vec(-1.0f64..1.0, 6),
            c in -2.0f64..2.0,
        ) {
            let b = JacobiBasis::new(-1.0, 1.0, 0.5, 0.5).unwrap();
            let o = FracOrder::derivative(0.5).unwrap();
            let pu = CoeffVector::new(b, u.clone()).unwrap();
            let pv = CoeffVector::new(b, v.clone()).unwrap();
            let w: Vec<f64> = u.iter().zip(&v).map(|(a, bb)| a + c * bb).collect();
            let pw = CoeffVector::new(b, w).unwrap();
            let fu = apply_coeff(&pu, o, Side::Left, 5).unwrap();
            let fv = apply_coeff(&pv, o, Side::Left, 5).unwrap();
            let fw = apply_coeff(&pw, o, Side::Left, 5).unwrap();
            for i in 0..6 {
                let lin = fu.coeffs()[i] + c * fv.coeffs()[i];
                prop_assert!((fw.coeffs()[i] - lin).abs() < 1e-10 * (1.0 + lin.abs()));
            }
        }
    }
}
