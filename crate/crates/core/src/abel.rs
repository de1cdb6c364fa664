//! The Abel equation I^α_{a+} ψ = f solved in coefficient space.
//!
//! The solution coefficients are ψ_m = Σ_n (−1)^n f_n A^{−α,β,γ}_{mn}: the
//! derivative operational matrix applied to f. Whether the resulting series
//! converges in L_q(ω) is governed by the decay ψ_m ∼ m^{−λ}:
//!
//! * λ ≤ 1/2: only q = p is guaranteed (`p-only`);
//! * 1/2 < λ < s: any q < (2s−1)/(s−λ) (`bounded-q`);
//! * λ ≥ s: q arbitrarily large (`unbounded-q`),
//!
//! with s = 3/2 + max{β, γ}.

use std::fmt;
use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fracops::{apply_signed, rl_quadrature, FracOrder, Side};
use crate::jacobi::JacobiBasis;
use crate::opmatrix::{assemble, singular_value_report};
use crate::quadrature::{synthesize, CoeffVector};

/// Smallest admissible fit window.
pub const MIN_FIT_WINDOW: usize = 6;

/// Fewest nonzero entries a decay fit accepts.
pub const MIN_FIT_POINTS: usize = 4;

/// Number of grid points of the pointwise part of [`residual`].
pub const RESIDUAL_GRID: usize = 50;

/// ψ ≈ D^α f truncated to degree `n`.
pub fn solve(f: &CoeffVector, alpha: f64, n: usize) -> Result<CoeffVector> {
    let order = FracOrder::derivative(alpha)?;
    apply_signed(f, order.signed(), Side::Left, n)
}

/// The integrability exponent s = 3/2 + max{β, γ}.
pub fn integrability_s(basis: &JacobiBasis) -> f64 {
    1.5 + basis.beta().max(basis.gamma())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    POnly,
    BoundedQ,
    UnboundedQ,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::POnly => "p-only",
            Regime::BoundedQ => "bounded-q",
            Regime::UnboundedQ => "unbounded-q",
        })
    }
}

/// The admissible integrability range of the solution series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QBound {
    /// Only q = p (no bound beyond the data's own exponent).
    None,
    /// Any q strictly below the value.
    Below(f64),
    /// Every finite q.
    Unbounded,
}

impl QBound {
    /// The numeric bound: `None` for p-only, +∞ when unbounded.
    pub fn value(&self) -> Option<f64> {
        match self {
            QBound::None => None,
            QBound::Below(q) => Some(*q),
            QBound::Unbounded => Some(f64::INFINITY),
        }
    }
}

/// Regime and q-bound for a decay exponent λ and integrability exponent s.
/// The boundaries are closed toward the outer regimes: λ = 1/2 is p-only and
/// λ = s is unbounded.
pub fn regime_for(lambda: f64, s: f64) -> (Regime, QBound) {
    if lambda <= 0.5 {
        (Regime::POnly, QBound::None)
    } else if lambda < s {
        (Regime::BoundedQ, QBound::Below((2.0 * s - 1.0) / (s - lambda)))
    } else {
        (Regime::UnboundedQ, QBound::Unbounded)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    /// Fitted decay exponent, clamped at 0 for non-decaying input.
    pub lambda_hat: f64,
    pub s: f64,
    pub q_bound: QBound,
    pub regime: Regime,
    pub fit_range: RangeInclusive<usize>,
    /// RMS of the log-log fit.
    pub fit_residual: f64,
    /// Indices in the window left out of the fit (zero entries, and m = 0).
    pub skipped: Vec<usize>,
}

/// The default window: the upper half of the available indices.
pub fn default_window(len: usize) -> RangeInclusive<usize> {
    (len / 2)..=(len.saturating_sub(1))
}

/// Fits |c_m| ≈ C m^{−λ} on `window` (default: upper half) by least squares in log-log.
pub fn estimate_decay(c: &CoeffVector, window: Option<RangeInclusive<usize>>) -> Result<DecayReport> {
    let window = window.unwrap_or_else(|| default_window(c.len()));
    if window.is_empty() || *window.end() >= c.len() {
        return Err(Error::Index(format!(
            "fit window {window:?} outside the coefficient range 0..{}",
            c.len()
        )));
    }
    let width = window.end() - window.start() + 1;
    if width < MIN_FIT_WINDOW {
        return Err(Error::Index(format!(
            "fit window of {width} indices is shorter than {MIN_FIT_WINDOW}"
        )));
    }
    let mut skipped = Vec::new();
    let mut pts = Vec::new();
    for m in window.clone() {
        let v = c.coeffs()[m].abs();
        if m == 0 || v == 0.0 {
            skipped.push(m);
        } else {
            pts.push(((m as f64).ln(), v.ln()));
        }
    }
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit(format!(
            "only {} nonzero entries in the window, need {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    let (slope, intercept) = least_squares(&pts);
    let rms = (pts
        .iter()
        .map(|(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    let lambda_hat = (-slope).max(0.0);
    let s = integrability_s(c.basis());
    let (regime, q_bound) = regime_for(lambda_hat, s);
    Ok(DecayReport {
        lambda_hat,
        s,
        q_bound,
        regime,
        fit_range: window,
        fit_residual: rms,
        skipped,
    })
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    /// ‖T ψ − f‖₂ over the common leading coefficients.
    pub coefficient_norm: f64,
    /// max |f(x) − I^α[ψ](x)| over the grid, with I^α by direct quadrature.
    pub pointwise_sup: f64,
}

impl Residual {
    pub fn value(&self) -> f64 {
        self.coefficient_norm.max(self.pointwise_sup)
    }
}

/// A-posteriori check of I^α ψ = f: coefficient-space mismatch plus the
/// pointwise mismatch at the midpoints of 50 equal cells of the interval.
pub fn residual(f: &CoeffVector, psi: &CoeffVector, alpha: f64) -> Result<Residual> {
    psi.ensure_same_basis(f.basis())?;
    let order = FracOrder::integral(alpha)?;
    let image = apply_signed(psi, alpha, Side::Left, f.len() - 1)?;
    let coefficient_norm = image
        .coeffs()
        .iter()
        .zip(f.coeffs())
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let basis = f.basis();
    let (a, len) = (basis.a(), basis.interval().length());
    let mut pointwise_sup = 0.0f64;
    for i in 0..RESIDUAL_GRID {
        let x = a + (i as f64 + 0.5) * len / RESIDUAL_GRID as f64;
        let fx = synthesize(f, x)?;
        let ix = rl_quadrature(|t| synthesize(psi, t).unwrap_or(f64::NAN), order, Side::Left, x, basis)?;
        pointwise_sup = pointwise_sup.max((fx - ix).abs());
    }
    if !pointwise_sup.is_finite() {
        return Err(Error::Evaluation("non-finite residual".into()));
    }
    Ok(Residual { coefficient_norm, pointwise_sup })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZmCondition {
    /// Truncated Ω_q with M_n = n^{a+1/2} (constant normalized to 1).
    pub omega_q: f64,
    /// The summand exponent q(s−λ̂)−2s, when a decay could be fitted.
    pub exponent: Option<f64>,
    /// The series is judged convergent when the exponent is below −1 or the
    /// coefficients have effectively finite support.
    pub convergent: bool,
}

/// Ω_q(c) = (Σ |c_n|^q n^{q−2} M_n^{q−2})^{1/q} with M_n = n^{a+1/2},
/// a = max{β, γ}, together with the convergence verdict of the infinite series
/// extrapolated at the fitted decay λ̂ (or the supplied one).
pub fn zm_condition(c: &CoeffVector, q: f64, lambda: Option<f64>) -> Result<ZmCondition> {
    if !(q >= 2.0) || !q.is_finite() {
        return Err(Error::domain(format!("zm_condition needs finite q >= 2, got {q}")));
    }
    let s = integrability_s(c.basis());
    // n^{q−2} M_n^{q−2} = n^{(q−2)(a+3/2)} = n^{(q−2)s}
    let sum: f64 = c
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, v)| v.abs().powf(q) * (n.max(1) as f64).powf((q - 2.0) * s))
        .sum();
    let omega_q = sum.powf(1.0 / q);
    let lambda = match lambda {
        Some(l) => Some(l),
        None if c.len() >= 2 * MIN_FIT_WINDOW => match estimate_decay(c, None) {
            Ok(r) => Some(r.lambda_hat),
            Err(Error::DegenerateFit(_)) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    let exponent = lambda.map(|l| q * (s - l) - 2.0 * s);
    let convergent = exponent.is_none_or(|e| e < -1.0);
    Ok(ZmCondition { omega_q, exponent, convergent })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub n: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub condition: f64,
    /// Number of singular values above `sigma_max · 1e-12 · (N+1)`.
    pub numerical_rank: usize,
}

/// Singular-value probe of the truncated derivative matrix: a full numerical
/// rank means distinct truncated ψ have distinct images. A finite-dimensional
/// proxy only.
pub fn derivative_condition(basis: &JacobiBasis, alpha: f64, n: usize) -> Result<ConditionReport> {
    let order = FracOrder::derivative(alpha)?;
    let m = assemble(basis, order.signed(), Side::Left, n)?;
    let sv = singular_value_report(&m)?;
    let sigma_max = sv[0];
    let sigma_min = *sv.last().expect("non-empty");
    let tol = sigma_max * 1e-12 * (n + 1) as f64;
    Ok(ConditionReport {
        n,
        sigma_max,
        sigma_min,
        condition: sigma_max / sigma_min,
        numerical_rank: sv.iter().filter(|&&s| s > tol).count(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// ‖D^α S_k f‖₂ for k = 0..len(f)−1, S_k the partial sum of degree k.
    pub norms: Vec<f64>,
    /// Ratio of the last norm to the smallest norm after the first quarter;
    /// large values flag a growing sequence.
    pub growth: f64,
}

/// Empirical look at the boundedness of ‖D^α S_k f‖ over the available partial sums.
pub fn derivative_stability(f: &CoeffVector, alpha: f64) -> Result<StabilityReport> {
    let order = FracOrder::derivative(alpha)?;
    let n = f.len() - 1;
    let m = assemble(f.basis(), order.signed(), Side::Left, n)?;
    let mut norms = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let part = f.truncated(k);
        let img = m.apply(part.coeffs())?;
        norms.push(img.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    let start = norms.len() / 4;
    let floor = norms[start..].iter().cloned().fold(f64::INFINITY, f64::min);
    let last = *norms.last().expect("non-empty");
    let growth = if floor > 0.0 { last / floor } else { 1.0 };
    Ok(StabilityReport { norms, growth })
}
