//! Operational matrices of the Riemann–Liouville operators in an orthonormal
//! Jacobi basis.
//!
//! For the left operator the signed entry is `(p_m, I^α_{a+} p_n)_ω = (−1)^n A_{mn}`
//! with
//!
//! ```text
//! A_{mn} = ĥδ_m Σ_{k=0}^{n} (−1)^k 𝔠_n^{(k)}(β,γ) B(α+β+k+1, γ+m+1) / Γ(k+α−m+1),
//! ĥδ_m   = (b−a)^{α+(β+γ+1)/2} N_m .
//! ```
//!
//! A negative order −α stands for the derivative `D^α` (I^{−α} := D^α). The right
//! operator uses the mirrored basis: its signed entry is `(−1)^m A_{mn}` computed
//! with β and γ exchanged.
//!
//! The alternating sum cancels by roughly 2.6 bits per degree, so each entry is
//! evaluated by escalating routes: signed-log terms with compensated summation,
//! then an exact-rational double-double sum, then the same sum at adaptive
//! arbitrary precision.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::bigfloat::{big, big_shift, log2_abs, to_signed_log, Big};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::fracops::Side;
use crate::jacobi::JacobiBasis;
use crate::special::{beta, log_gamma_signed, rgamma_signed, CompensatedSum, SignedLogValue};

/// Truncation above which the assembled matrices are flagged as unverified.
pub const STABILITY_CAP: usize = 30;

/// Environment variable that overrides [`STABILITY_CAP`].
pub const STABILITY_CAP_ENV: &str = "JACFRAC_MAX_N";

/// Largest index accepted by [`oracle_entry`].
pub const ORACLE_CAP: usize = 20;

/// Largest matrix dimension (N+1) the assembly accepts.
pub const MAX_DIMENSION: usize = 257;

/// Largest truncation accepted by [`singular_value_report`].
pub const SVD_CAP: usize = 200;

/// Relative size below which the compensated signed-log sum is considered
/// cancelled and the entry is recomputed exactly.
const CANCELLATION_THRESHOLD: f64 = 1e-6;

/// Largest estimated relative error accepted from the signed-log route.
const SIGNED_LOG_REL_TOL: f64 = 1e-13;

/// Worst admissible loss (as a ratio max|term| / |sum|) of the double-double route.
const DD_MAX_LOSS: f64 = 1e16;

/// Effective stability cap: `JACFRAC_MAX_N` if set to a valid integer, else [`STABILITY_CAP`].
/// The flag tells whether the override is active.
pub fn stability_cap() -> (usize, bool) {
    match std::env::var(STABILITY_CAP_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(n) => (n, true),
        None => (STABILITY_CAP, false),
    }
}

fn validate_order(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= -1.0 || alpha >= 1.0 {
        return Err(Error::OrderRange(format!("signed order must lie in (-1, 1), got {alpha}")));
    }
    Ok(())
}

fn ln_gamma(x: f64) -> f64 {
    log_gamma_signed(x).expect("positive argument").logmag()
}

/// Precomputed data for the entries of one A-matrix (fixed basis and signed order).
struct EntryContext {
    basis: JacobiBasis,
    alpha: f64,
    rows: usize,
    cols: usize,
    /// ln λ_n with 𝔠_n^{(k)} = λ_n T_{nk}.
    ln_scale: Vec<f64>,
    /// T_{nk} for n < cols, k ≤ n.
    taylor: Vec<Vec<Dd>>,
    /// ln of ĥδ_m.
    ln_hdelta: Vec<f64>,
    /// ln of Γ(γ+m+1)Γ(α+β+1) / (Γ(α+β+γ+m+2)Γ(α+1)), the k-independent
    /// part of B(·)/Γ(·) in the exact routes.
    ln_beta_common: Vec<f64>,
    big: OnceLock<BigTables>,
}

struct BigTables {
    prec: usize,
    taylor: Vec<Vec<Big>>,
    ratios: Vec<Vec<Big>>,
}

impl EntryContext {
    fn new(basis: &JacobiBasis, alpha: f64, rows: usize, cols: usize) -> Result<Self> {
        validate_order(alpha)?;
        let (b, g) = (basis.beta(), basis.gamma());
        if alpha + b + 1.0 <= 0.0 {
            return Err(Error::domain(format!(
                "Beta argument alpha+beta+1 = {} is not positive (alpha = {alpha}, beta = {b})",
                alpha + b + 1.0
            )));
        }
        if rows == 0 || cols == 0 || rows > MAX_DIMENSION || cols > MAX_DIMENSION {
            return Err(Error::Index(format!(
                "matrix dimensions {rows}x{cols} outside 1..={MAX_DIMENSION}"
            )));
        }
        let ln_len = basis.interval().length().ln();
        let ln_scale = (0..cols).map(|n| basis.ln_taylor_scale(n)).collect();
        let taylor = (0..cols).into_par_iter().map(|n| taylor_row_dd(basis, n)).collect();
        let ln_hdelta: Vec<f64> = (0..rows)
            .map(|m| (alpha + 0.5 * (b + g + 1.0)) * ln_len + basis.ln_norm_factor(m))
            .collect();
        let ln_beta_common = (0..rows)
            .map(|m| {
                let mf = m as f64;
                ln_gamma(g + mf + 1.0) + ln_gamma(alpha + b + 1.0)
                    - ln_gamma(alpha + b + g + mf + 2.0)
                    - ln_gamma(alpha + 1.0)
            })
            .collect();
        Ok(EntryContext {
            basis: *basis,
            alpha,
            rows,
            cols,
            ln_scale,
            taylor,
            ln_hdelta,
            ln_beta_common,
            big: OnceLock::new(),
        })
    }

    fn default_precision(&self) -> usize {
        128 + 4 * self.rows.max(self.cols)
    }

    fn entry(&self, m: usize, n: usize) -> f64 {
        if let Some(v) = self.signed_log_route(m, n) {
            return v;
        }
        if let Some(v) = self.dd_route(m, n) {
            return v;
        }
        self.big_route(m, n)
    }

    /// Literal term-by-term evaluation in signed-log form. `None` when the
    /// compensated sum has cancelled below the threshold.
    fn signed_log_route(&self, m: usize, n: usize) -> Option<f64> {
        let (b, g, al) = (self.basis.beta(), self.basis.gamma(), self.alpha);
        let mf = m as f64;
        let mut terms = Vec::with_capacity(n + 1);
        let mut spreads = Vec::with_capacity(n + 1);
        for (k, t) in self.taylor[n].iter().enumerate() {
            let kf = k as f64;
            let r = rgamma_signed(kf + al - mf + 1.0);
            if r.is_zero() {
                continue;
            }
            let tf = t.to_f64();
            if !(tf.is_finite() && tf > 0.0) {
                return None;
            }
            let c = SignedLogValue::new(1, self.ln_scale[n] + tf.ln());
            let bt = beta(al + b + kf + 1.0, g + mf + 1.0).ok()?;
            let sign = if k % 2 == 0 { 1 } else { -1 };
            let term = SignedLogValue::new(sign, 0.0) * c * bt * r;
            // each log piece carries a rounding error proportional to its size
            let pieces = c.logmag().abs() + bt.logmag().abs() + r.logmag().abs() + 1.0;
            terms.push(term);
            spreads.push(pieces);
        }
        if terms.is_empty() {
            return Some(0.0);
        }
        let shift = terms.iter().map(|t| t.logmag()).fold(f64::NEG_INFINITY, f64::max);
        let sum: CompensatedSum = terms.iter().map(|t| t.to_f64_scaled(shift)).collect();
        let s = sum.value();
        if !s.is_finite() || s.abs() < CANCELLATION_THRESHOLD {
            return None;
        }
        // Even above the cancellation threshold the per-term log errors are
        // magnified by max|term|/|sum|; hand over unless the estimate is tight.
        let err: f64 = terms
            .iter()
            .zip(&spreads)
            .map(|(t, p)| (t.logmag() - shift).exp() * p * 4.0 * f64::EPSILON)
            .sum();
        if err > SIGNED_LOG_REL_TOL * s.abs() {
            return None;
        }
        let v = SignedLogValue::from_f64(s);
        Some(f64::from(v.sign()) * (v.logmag() + shift + self.ln_hdelta[m]).exp())
    }

    /// ĥδ_m λ_n Γ(γ+m+1)Γ(α+β+1)/(Γ(α+β+γ+m+2)Γ(α+1)), as a log.
    fn ln_prefactor(&self, m: usize, n: usize) -> f64 {
        self.ln_hdelta[m] + self.ln_scale[n] + self.ln_beta_common[m]
    }

    /// Σ_k (−1)^k T_{nk} ρ_{mk} with the exact ratios
    /// ρ_{mk} = (α+β+1)_k/(α+β+γ+m+2)_k · Γ(α+1)/Γ(α+1+k−m), in double-double.
    fn dd_route(&self, m: usize, n: usize) -> Option<f64> {
        let ratios = ratio_row_dd(&self.basis, self.alpha, m, n);
        let mut sum = Dd::ZERO;
        let mut max_term = 0.0f64;
        for (k, (t, r)) in self.taylor[n].iter().zip(&ratios).enumerate() {
            let term = *t * *r;
            max_term = max_term.max(term.to_f64().abs());
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        let s = sum.to_f64();
        if !s.is_finite() || !max_term.is_finite() {
            return None;
        }
        if max_term == 0.0 {
            return Some(0.0);
        }
        if s.abs() * DD_MAX_LOSS < max_term {
            return None;
        }
        let v = SignedLogValue::from_f64(s);
        Some(f64::from(v.sign()) * (v.logmag() + self.ln_prefactor(m, n)).exp())
    }

    fn big_tables(&self) -> &BigTables {
        self.big.get_or_init(|| {
            BigTables::build(&self.basis, self.alpha, self.rows, self.cols, self.default_precision())
        })
    }

    fn big_route(&self, m: usize, n: usize) -> f64 {
        let tables = self.big_tables();
        let (sum, loss) = tables.sum(m, n);
        let sum = if loss + 80.0 > tables.prec as f64 {
            // rare: not enough headroom, redo this entry with doubled precision.
            // A sum that vanished entirely (infinite loss) gets one retry; if it
            // is zero again it is taken as an exact zero.
            let extra = if loss.is_finite() { loss.max(0.0).ceil() as usize } else { 64 };
            let prec = 2 * tables.prec + extra;
            let single = BigTables::build(&self.basis, self.alpha, m + 1, n + 1, prec);
            single.sum(m, n).0
        } else {
            sum
        };
        let v = to_signed_log(&sum);
        if v.is_zero() {
            return 0.0;
        }
        f64::from(v.sign()) * (v.logmag() + self.ln_prefactor(m, n)).exp()
    }
}

impl BigTables {
    fn build(basis: &JacobiBasis, alpha: f64, rows: usize, cols: usize, prec: usize) -> Self {
        let taylor = (0..cols)
            .into_par_iter()
            .map(|n| taylor_row_big(basis, n, prec))
            .collect();
        let ratios = (0..rows)
            .into_par_iter()
            .map(|m| ratio_row_big(basis, alpha, m, cols - 1, prec))
            .collect();
        BigTables { prec, taylor, ratios }
    }

    /// The alternating sum and its cancellation in bits.
    fn sum(&self, m: usize, n: usize) -> (Big, f64) {
        let mut sum = big(0.0, self.prec);
        let mut max_log2 = f64::NEG_INFINITY;
        for (k, t) in self.taylor[n].iter().enumerate() {
            let term = t * &self.ratios[m][k];
            max_log2 = max_log2.max(log2_abs(&term));
            if k % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
        let s = log2_abs(&sum);
        let loss = if max_log2 == f64::NEG_INFINITY {
            0.0
        } else if s == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            max_log2 - s
        };
        (sum, loss)
    }
}

/// T_{nk} = n!/(n−k)! Σ_i C(k,i)/((β+1)_i (γ+1)_{n−i}) for k = 0..=n.
fn taylor_row_dd(basis: &JacobiBasis, n: usize) -> Vec<Dd> {
    let inv_b = inverse_rising_dd(basis.beta() + 1.0, n);
    let inv_g = inverse_rising_dd(basis.gamma() + 1.0, n);
    let mut row = Vec::with_capacity(n + 1);
    let mut binom = vec![Dd::ONE];
    let mut falling = Dd::ONE;
    for k in 0..=n {
        if k > 0 {
            falling *= (n - k + 1) as f64;
            let mut next = vec![Dd::ONE; k + 1];
            for i in 1..k {
                next[i] = binom[i - 1] + binom[i];
            }
            binom = next;
        }
        let s: Dd = (0..=k).map(|i| binom[i] * inv_b[i] * inv_g[n - i]).sum();
        row.push(falling * s);
    }
    row
}

fn inverse_rising_dd(x: f64, n: usize) -> Vec<Dd> {
    let mut out = Vec::with_capacity(n + 1);
    let mut p = Dd::ONE;
    out.push(p);
    for j in 0..n {
        p /= Dd::sum_of(x, j as f64);
        out.push(p);
    }
    out
}

/// ρ_{mk} for k = 0..=n_max in double-double.
fn ratio_row_dd(basis: &JacobiBasis, alpha: f64, m: usize, n_max: usize) -> Vec<Dd> {
    let (b, g) = (basis.beta(), basis.gamma());
    let ab1 = alpha + b + 1.0;
    let abgm2 = alpha + b + g + m as f64 + 2.0;
    let shift = shift_ratios_dd(alpha, m, n_max);
    let mut poch = Dd::ONE;
    let mut out = Vec::with_capacity(n_max + 1);
    for (k, r) in shift.into_iter().enumerate() {
        if k > 0 {
            poch = poch * Dd::sum_of(ab1, (k - 1) as f64) / Dd::sum_of(abgm2, (k - 1) as f64);
        }
        out.push(poch * r);
    }
    out
}

/// R_k = Γ(α+1)/Γ(α+1+k−m): the polynomial α(α−1)···(α−(m−k)+1) for k < m and
/// 1/(α+1)_{k−m} for k ≥ m. Built without division by the vanishing factor at α = 0.
fn shift_ratios_dd(alpha: f64, m: usize, n_max: usize) -> Vec<Dd> {
    let mut r = vec![Dd::ZERO; n_max + 1];
    let mut p = Dd::ONE;
    for k in (0..m).rev() {
        p *= Dd::sum_of(alpha, -((m - k - 1) as f64));
        if k <= n_max {
            r[k] = p;
        }
    }
    let mut q = Dd::ONE;
    for k in m..=n_max {
        if k > m {
            q /= Dd::sum_of(alpha, (k - m) as f64);
        }
        r[k] = q;
    }
    r
}

fn taylor_row_big(basis: &JacobiBasis, n: usize, prec: usize) -> Vec<Big> {
    let one = big(1.0, prec);
    let inverse_rising = |x: f64| {
        let mut out = Vec::with_capacity(n + 1);
        let mut p = one.clone();
        out.push(p.clone());
        for j in 0..n {
            p /= big_shift(x, j as i64, prec);
            out.push(p.clone());
        }
        out
    };
    let inv_b = inverse_rising(basis.beta() + 1.0);
    let inv_g = inverse_rising(basis.gamma() + 1.0);
    let cross: Vec<Big> = (0..=n).map(|i| &inv_b[i] * &inv_g[n - i]).collect();
    let mut row = Vec::with_capacity(n + 1);
    let mut binom = vec![one.clone()];
    let mut falling = one.clone();
    for k in 0..=n {
        if k > 0 {
            falling *= big((n - k + 1) as f64, prec);
            let mut next = vec![one.clone(); k + 1];
            for i in 1..k {
                next[i] = &binom[i - 1] + &binom[i];
            }
            binom = next;
        }
        let mut s = big(0.0, prec);
        for i in 0..=k {
            s += &binom[i] * &cross[i];
        }
        row.push(&falling * &s);
    }
    row
}

fn ratio_row_big(basis: &JacobiBasis, alpha: f64, m: usize, n_max: usize, prec: usize) -> Vec<Big> {
    let (b, g) = (basis.beta(), basis.gamma());
    let ab1 = alpha + b + 1.0;
    let abgm2 = alpha + b + g + m as f64 + 2.0;
    let mut r = vec![big(0.0, prec); n_max + 1];
    let mut p = big(1.0, prec);
    for k in (0..m).rev() {
        p *= big_shift(alpha, -((m - k - 1) as i64), prec);
        if k <= n_max {
            r[k] = p.clone();
        }
    }
    let mut q = big(1.0, prec);
    for k in m..=n_max {
        if k > m {
            q /= big_shift(alpha, (k - m) as i64, prec);
        }
        r[k] = q.clone();
    }
    let mut poch = big(1.0, prec);
    for (k, rk) in r.iter_mut().enumerate() {
        if k > 0 {
            poch = poch * big_shift(ab1, (k - 1) as i64, prec) / big_shift(abgm2, (k - 1) as i64, prec);
        }
        *rk = &poch * &*rk;
    }
    r
}

/// A^{α,β,γ}_{mn} for the given basis and signed order α ∈ (−1, 1).
pub fn a_entry(basis: &JacobiBasis, alpha: f64, m: usize, n: usize) -> Result<f64> {
    let ctx = EntryContext::new(basis, alpha, m + 1, n + 1)?;
    Ok(ctx.entry(m, n))
}

/// A signed operational matrix: entry(m, n) = (p_m, T p_n)_ω.
#[derive(Debug, Clone, PartialEq)]
pub struct OpMatrix {
    basis: JacobiBasis,
    alpha: f64,
    side: Side,
    entries: DMatrix<f64>,
}

impl OpMatrix {
    pub fn basis(&self) -> &JacobiBasis {
        &self.basis
    }

    /// Signed order: positive for integrals, negative for derivatives.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    /// Truncation degree N of a square matrix (dimension N+1).
    pub fn n(&self) -> usize {
        self.cols() - 1
    }

    pub fn entry(&self, m: usize, n: usize) -> f64 {
        self.entries[(m, n)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Rebuilds a matrix from stored entries (e.g. after deserialization).
    pub fn from_entries(
        basis: JacobiBasis,
        alpha: f64,
        side: Side,
        entries: DMatrix<f64>,
    ) -> Result<Self> {
        validate_order(alpha)?;
        if entries.is_empty() || entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Evaluation("matrix entries must be finite and non-empty".into()));
        }
        Ok(OpMatrix { basis, alpha, side, entries })
    }

    /// Matrix–vector product with compensated row sums. Extra input
    /// coefficients beyond the column count are an error; missing ones are zero.
    pub fn apply(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() > self.cols() {
            return Err(Error::Index(format!(
                "{} coefficients exceed the matrix column count {}",
                coeffs.len(),
                self.cols()
            )));
        }
        Ok((0..self.rows())
            .map(|m| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(n, c)| self.entries[(m, n)] * c)
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect())
    }
}

/// The square (N+1)×(N+1) signed matrix of I^α (α > 0) or D^{|α|} (α < 0).
pub fn assemble(basis: &JacobiBasis, alpha: f64, side: Side, n: usize) -> Result<OpMatrix> {
    assemble_rect(basis, alpha, side, n + 1, n + 1)
}

/// Rectangular variant: `rows` output and `cols` input coefficients.
pub fn assemble_rect(
    basis: &JacobiBasis,
    alpha: f64,
    side: Side,
    rows: usize,
    cols: usize,
) -> Result<OpMatrix> {
    let (cap, _) = stability_cap();
    if rows.max(cols) > cap + 1 {
        log::warn!(
            "truncation {} exceeds the stability cap {cap}; accuracy is unverified",
            rows.max(cols) - 1
        );
    }
    let expansion = match side {
        Side::Left => *basis,
        Side::Right => basis.swapped(),
    };
    let ctx = EntryContext::new(&expansion, alpha, rows, cols)?;
    let values: Vec<f64> = (0..rows * cols)
        .into_par_iter()
        .map(|idx| {
            let (m, n) = (idx % rows, idx / rows);
            let a = ctx.entry(m, n);
            let flip = match side {
                Side::Left => n % 2 == 1,
                Side::Right => m % 2 == 1,
            };
            if flip {
                -a
            } else {
                a
            }
        })
        .collect();
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Evaluation(format!(
            "non-finite entry at (m, n) = ({}, {})",
            bad % rows,
            bad / rows
        )));
    }
    Ok(OpMatrix {
        basis: *basis,
        alpha,
        side,
        entries: DMatrix::from_vec(rows, cols, values),
    })
}

/// Independent evaluation of (p_m, T p_n)_ω: both polynomials are expanded in
/// powers about the operator's base point, every power is mapped by the
/// closed-form fractional integral, and the resulting products are integrated
/// against ω through Beta moments. Evaluated at fixed high precision.
pub fn oracle_entry(basis: &JacobiBasis, alpha: f64, side: Side, m: usize, n: usize) -> Result<f64> {
    validate_order(alpha)?;
    if m > ORACLE_CAP || n > ORACLE_CAP {
        return Err(Error::Index(format!(
            "oracle indices must be <= {ORACLE_CAP}, got m={m}, n={n}"
        )));
    }
    // Left: powers of (x−a), signs (−1)^{n+k}. Right: powers of (b−x) with the
    // mirrored Taylor data and signs (−1)^k.
    let (exp_basis, outer_sign) = match side {
        Side::Left => (*basis, if (n + m).is_multiple_of(2) { 1.0 } else { -1.0 }),
        Side::Right => (basis.swapped(), 1.0),
    };
    let (b, g) = (exp_basis.beta(), exp_basis.gamma());
    if alpha + b + 1.0 <= 0.0 {
        return Err(Error::domain(format!(
            "moment integral diverges: alpha+beta+1 = {}",
            alpha + b + 1.0
        )));
    }
    let prec = 512;
    let tn = taylor_row_big(&exp_basis, n, prec);
    let tm = taylor_row_big(&exp_basis, m, prec);
    // I^α (x−a)^k = k!/Γ(k+1+α) (x−a)^{k+α}; k!/Γ(k+1+α) = k!/((α+1)_k Γ(α+1)).
    let mut power_ratio = Vec::with_capacity(n + 1);
    let mut pr = big(1.0, prec);
    for k in 0..=n {
        if k > 0 {
            pr = pr * big(k as f64, prec) / big_shift(alpha + 1.0, (k - 1) as i64, prec);
        }
        power_ratio.push(pr.clone());
    }
    // ∫ (x−a)^{k+j+α+β} (b−x)^γ dx = L^{k+j+α+β+γ+1} B(k+j+α+β+1, γ+1)
    //   = L^{…} B(α+β+1, γ+1) (α+β+1)_{k+j}/(α+β+γ+2)_{k+j}.
    let mut moment = Vec::with_capacity(n + m + 1);
    let mut mo = big(1.0, prec);
    for s in 0..=(n + m) {
        if s > 0 {
            mo = mo * big_shift(alpha + b + 1.0, (s - 1) as i64, prec)
                / big_shift(alpha + b + g + 2.0, (s - 1) as i64, prec);
        }
        moment.push(mo.clone());
    }
    let mut inv_fact = Vec::with_capacity(n.max(m) + 1);
    let mut f = big(1.0, prec);
    for j in 0..=n.max(m) {
        if j > 0 {
            f /= big(j as f64, prec);
        }
        inv_fact.push(f.clone());
    }
    let mut sum = big(0.0, prec);
    for (k, tk) in tn.iter().enumerate() {
        // 1/k! from the Taylor expansion cancels the k! of the power rule
        let inner = tk * &power_ratio[k] * &inv_fact[k];
        for (j, tj) in tm.iter().enumerate() {
            let term = &inner * tj * &inv_fact[j] * &moment[k + j];
            if (k + j) % 2 == 0 {
                sum += term;
            } else {
                sum -= term;
            }
        }
    }
    let ln_len = exp_basis.interval().length().ln();
    let ln_beta = beta(alpha + b + 1.0, g + 1.0)?.logmag();
    let ln_pref = exp_basis.ln_taylor_scale(n) + exp_basis.ln_taylor_scale(m)
        + (alpha + b + g + 1.0) * ln_len
        + ln_beta
        - ln_gamma(alpha + 1.0);
    let v = to_signed_log(&sum);
    if v.is_zero() {
        return Ok(0.0);
    }
    Ok(outer_sign * f64::from(v.sign()) * (v.logmag() + ln_pref).exp())
}

/// Outcome of [`check_ultraspherical_symmetry`].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SymmetryReport {
    pub n: usize,
    pub alpha: f64,
    /// max |A_{mn} − A_{nm}| over m, n ≤ N.
    pub max_asymmetry: f64,
    /// max |(p_m, I p_n) − (−1)^{n+m} (p_n, I p_m)|, from the independent oracle
    /// where its index cap allows, otherwise from the assembled matrix.
    pub eq24_violation: f64,
    /// max |S_{mn} − S_{nm}| of the signed matrix over even m, n.
    pub even_block_asymmetry: f64,
    /// Same over odd m, n.
    pub odd_block_asymmetry: f64,
}

impl SymmetryReport {
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.max_asymmetry <= tol && self.eq24_violation <= tol
    }
}

/// Measures the symmetry of the left operational matrix on an ultraspherical basis.
pub fn check_ultraspherical_symmetry(
    basis: &JacobiBasis,
    alpha: f64,
    n: usize,
) -> Result<SymmetryReport> {
    if !basis.is_ultraspherical() {
        return Err(Error::Precondition(format!(
            "symmetry check needs beta = gamma, got beta = {}, gamma = {}",
            basis.beta(),
            basis.gamma()
        )));
    }
    let signed = assemble(basis, alpha, Side::Left, n)?;
    // unsigned A_{mn} = (−1)^n S_{mn}
    let unsigned = |m: usize, k: usize| {
        let s = signed.entry(m, k);
        if k.is_multiple_of(2) {
            s
        } else {
            -s
        }
    };
    let mut max_asym = 0.0f64;
    let mut even = 0.0f64;
    let mut odd = 0.0f64;
    for m in 0..=n {
        for k in 0..m {
            max_asym = max_asym.max((unsigned(m, k) - unsigned(k, m)).abs());
            if (m + k) % 2 == 0 {
                let d = (signed.entry(m, k) - signed.entry(k, m)).abs();
                if m % 2 == 0 {
                    even = even.max(d);
                } else {
                    odd = odd.max(d);
                }
            }
        }
    }
    let eq24 = if n <= ORACLE_CAP {
        let inner: Vec<Vec<f64>> = (0..=n)
            .into_par_iter()
            .map(|m| (0..=n).map(|k| oracle_entry(basis, alpha, Side::Left, m, k)).collect())
            .collect::<Vec<Vec<Result<f64>>>>()
            .into_iter()
            .map(|row| row.into_iter().collect::<Result<Vec<f64>>>())
            .collect::<Result<_>>()?;
        let mut worst = 0.0f64;
        for m in 0..=n {
            for k in 0..m {
                let sign = if (m + k) % 2 == 0 { 1.0 } else { -1.0 };
                worst = worst.max((inner[m][k] - sign * inner[k][m]).abs());
            }
        }
        worst
    } else {
        let mut worst = 0.0f64;
        for m in 0..=n {
            for k in 0..m {
                let sign = if (m + k) % 2 == 0 { 1.0 } else { -1.0 };
                worst = worst.max((signed.entry(m, k) - sign * signed.entry(k, m)).abs());
            }
        }
        worst
    };
    Ok(SymmetryReport {
        n,
        alpha,
        max_asymmetry: max_asym,
        eq24_violation: eq24,
        even_block_asymmetry: even,
        odd_block_asymmetry: odd,
    })
}

/// Singular values of the truncated matrix, largest first.
pub fn singular_value_report(m: &OpMatrix) -> Result<Vec<f64>> {
    if m.rows().max(m.cols()) > SVD_CAP + 1 {
        return Err(Error::Index(format!("singular value report needs N <= {SVD_CAP}")));
    }
    let mut sv: Vec<f64> = m.entries.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_jacobi, weighted_integral};
    use crate::special::gamma;
    use proptest::prelude::*;

    fn bases() -> Vec<JacobiBasis> {
        vec![
            JacobiBasis::new(0.0, 1.0, 0.0, 0.0).unwrap(),
            JacobiBasis::new(-1.0, 1.0, 0.5, 0.5).unwrap(),
            JacobiBasis::new(0.0, 2.0, -0.5, 0.0).unwrap(),
            JacobiBasis::new(-1.0, 1.0, 0.3, 0.3).unwrap(),
        ]
    }

    #[test]
    fn half_integral_of_one_on_unit_interval() {
        let basis = JacobiBasis::legendre(0.0, 1.0).unwrap();
        let want = 4.0 / (3.0 * std::f64::consts::PI.sqrt());
        let a = a_entry(&basis, 0.5, 0, 0).unwrap();
        assert!((a - want).abs() < 1e-14, "{a} vs {want}");
        let o = oracle_entry(&basis, 0.5, Side::Left, 0, 0).unwrap();
        assert!((o - want).abs() < 1e-14);
    }

    #[test]
    fn order_zero_is_identity() {
        for basis in bases() {
            for side in [Side::Left, Side::Right] {
                let m = assemble(&basis, 0.0, side, 15).unwrap();
                for i in 0..=15 {
                    for j in 0..=15 {
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((m.entry(i, j) - want).abs() < 1e-8, "{basis:?} {i} {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn assembled_entries_match_oracle() {
        for basis in bases() {
            for &al in &[0.25, 0.5, 0.75, -0.25] {
                if al + basis.beta().min(basis.gamma()) + 1.0 <= 0.0 {
                    continue;
                }
                for side in [Side::Left, Side::Right] {
                    let m = assemble(&basis, al, side, 8).unwrap();
                    for i in 0..=8 {
                        for j in 0..=8 {
                            let o = oracle_entry(&basis, al, side, i, j).unwrap();
                            let e = m.entry(i, j);
                            assert!(
                                (e - o).abs() <= 1e-8f64.max(1e-12 * e.abs()),
                                "{basis:?} {al} {side:?} ({i},{j}): {e} vs {o}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn oracle_matches_gauss_jacobi_projection() {
        // Third route for a few entries: project I^α p_n onto p_m by adaptive
        // quadrature, using the power closed form for I^α of each monomial.
        let basis = JacobiBasis::new(0.0, 1.0, 0.5, 0.0).unwrap();
        let al = 0.5;
        for (m, n) in [(0, 0), (1, 2), (3, 1), (4, 4)] {
            let ipn = |x: f64| {
                (0..=n)
                    .map(|k| {
                        let c = basis.taylor_coeff(n, k).unwrap();
                        let sign = if (n + k) % 2 == 0 { 1.0 } else { -1.0 };
                        // (x−a)^k/k! ↦ (x−a)^{k+α}/Γ(k+1+α)
                        sign * c / gamma(k as f64 + 1.0 + al).unwrap() * x.powf(k as f64 + al)
                    })
                    .sum::<f64>()
            };
            // I^α of a polynomial carries a (x−a)^{1/2} factor, so integrate adaptively.
            let direct =
                weighted_integral(|x| basis.eval_pn(m, x).unwrap() * ipn(x), &basis).unwrap();
            let o = oracle_entry(&basis, al, Side::Left, m, n).unwrap();
            assert!((direct - o).abs() < 1e-10, "({m},{n}) {direct} vs {o}");
        }
    }

    #[test]
    fn nested_quadrature_second_oracle() {
        // (p_1, I^{1/2} p_0) on [0,1] with p_0 = 1, both integrals done numerically.
        let basis = JacobiBasis::legendre(0.0, 1.0).unwrap();
        let inner_rule_order = 30;
        let inner = |x: f64| {
            // ∫_0^x (x−t)^{−1/2} dt / Γ(1/2) by Gauss–Jacobi on [0, x]
            let sub = JacobiBasis::new(0.0, x, 0.0, -0.5).unwrap();
            let r = gauss_jacobi(&sub, inner_rule_order).unwrap();
            r.integrate(|_| 1.0) / gamma(0.5).unwrap()
        };
        let outer = weighted_integral(|x| basis.eval_pn(1, x).unwrap() * inner(x), &basis).unwrap();
        let o = oracle_entry(&basis, 0.5, Side::Left, 1, 0).unwrap();
        assert!((outer - o).abs() < 1e-7, "{outer} vs {o}");
    }

    #[test]
    fn ultraspherical_right_is_parity_conjugate_of_left() {
        let basis = JacobiBasis::new(-1.0, 1.0, 0.5, 0.5).unwrap();
        let l = assemble(&basis, 0.5, Side::Left, 10).unwrap();
        let r = assemble(&basis, 0.5, Side::Right, 10).unwrap();
        for i in 0..=10 {
            for j in 0..=10 {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((r.entry(i, j) - sign * l.entry(i, j)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn legendre_matrix_is_symmetric() {
        let basis = JacobiBasis::legendre(-1.0, 1.0).unwrap();
        let rep = check_ultraspherical_symmetry(&basis, 0.5, 10).unwrap();
        assert!(rep.max_asymmetry <= 1e-8, "{rep:?}");
        assert!(rep.eq24_violation <= 1e-8, "{rep:?}");
    }

    #[test]
    fn weighted_ultraspherical_matrix_is_not_symmetric() {
        // With a nontrivial weight the adjoint of I^α_{a+} in L2(ω) is
        // ω^{-1} I^α_{b−} ω, not I^α_{b−}; the oracle confirms the asymmetry.
        let basis = JacobiBasis::new(-1.0, 1.0, 0.3, 0.3).unwrap();
        let rep = check_ultraspherical_symmetry(&basis, 0.25, 6).unwrap();
        assert!(rep.eq24_violation > 1e-3, "{rep:?}");
        assert!((rep.eq24_violation - rep.max_asymmetry).abs() < 1e-8, "{rep:?}");
    }

    #[test]
    fn symmetry_check_rejects_unequal_exponents() {
        let basis = JacobiBasis::new(-1.0, 1.0, 0.5, 0.0).unwrap();
        assert!(matches!(
            check_ultraspherical_symmetry(&basis, 0.5, 4),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn order_zero_parity_blocks_are_exact() {
        let basis = JacobiBasis::legendre(-1.0, 1.0).unwrap();
        let rep = check_ultraspherical_symmetry(&basis, 0.0, 8).unwrap();
        assert!(rep.even_block_asymmetry < 1e-12 && rep.odd_block_asymmetry < 1e-12);
    }

    #[test]
    fn rejects_divergent_orders() {
        let basis = JacobiBasis::new(0.0, 1.0, -0.5, 0.0).unwrap();
        assert!(matches!(a_entry(&basis, -0.5, 0, 0), Err(Error::Domain(_))));
        assert!(matches!(a_entry(&basis, 1.0, 0, 0), Err(Error::OrderRange(_))));
        let leg = JacobiBasis::legendre(0.0, 1.0).unwrap();
        assert!(matches!(oracle_entry(&leg, 0.5, Side::Left, 21, 0), Err(Error::Index(_))));
    }

    #[test]
    fn high_degree_entries_agree_across_routes() {
        // Entries at degree ~40 cancel by ~100 bits; the exact route must agree
        // with an independent evaluation at doubled precision.
        let basis = JacobiBasis::new(-1.0, 1.0, 0.5, 0.0).unwrap();
        let ctx = EntryContext::new(&basis, 0.5, 41, 41).unwrap();
        for (m, n) in [(40, 40), (3, 40), (40, 2), (20, 33)] {
            let v = ctx.entry(m, n);
            let hi = BigTables::build(&basis, 0.5, m + 1, n + 1, 1200);
            let s = to_signed_log(&hi.sum(m, n).0);
            let want = f64::from(s.sign()) * (s.logmag() + ctx.ln_prefactor(m, n)).exp();
            assert!((v - want).abs() <= 1e-12 * want.abs().max(1.0), "({m},{n}) {v} vs {want}");
        }
    }

    #[test]
    fn singular_values_of_identity_and_half_integral() {
        let leg = JacobiBasis::legendre(-1.0, 1.0).unwrap();
        let id = assemble(&leg, 0.0, Side::Left, 6).unwrap();
        for s in singular_value_report(&id).unwrap() {
            assert!((s - 1.0).abs() < 1e-8);
        }
        let half = assemble(&leg, 0.5, Side::Left, 40).unwrap();
        let sv = singular_value_report(&half).unwrap();
        assert!(sv.iter().all(|&s| s >= 0.0));
        assert!(sv.windows(2).all(|w| w[0] > w[1]), "{sv:?}");
        assert!(sv[40] / sv[0] < 0.05, "{}", sv[40] / sv[0]);
    }

    #[test]
    fn shift_ratios_vanish_only_at_integer_order() {
        // R_k = Γ(α+1)/Γ(α+1+k−m)
        let r = shift_ratios_dd(0.0, 3, 5);
        let got: Vec<f64> = r.iter().map(|v| v.to_f64()).collect();
        assert_eq!(got, vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.5]);
        let r = shift_ratios_dd(0.25, 2, 5);
        for (k, v) in r.iter().enumerate() {
            let want = gamma(1.25).unwrap() / gamma(1.25 + k as f64 - 2.0).unwrap();
            assert!((v.to_f64() - want).abs() < 1e-14 * want.abs(), "{k}");
        }
    }

    #[test]
    fn apply_multiplies_with_zero_padding() {
        let leg = JacobiBasis::legendre(-1.0, 1.0).unwrap();
        let m = assemble(&leg, 0.5, Side::Left, 3).unwrap();
        let out = m.apply(&[0.0, 1.0]).unwrap();
        for i in 0..4 {
            assert_eq!(out[i], m.entry(i, 1));
        }
        assert!(m.apply(&[0.0; 5]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn entries_match_oracle_on_random_bases(
            b in -0.45f64..1.5, g in -0.45f64..1.5, al in -0.5f64..0.95,
            m in 0usize..10, n in 0usize..10,
        ) {
            let basis = JacobiBasis::new(-1.0, 2.0, b, g).unwrap();
            let a = a_entry(&basis, al, m, n).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let o = oracle_entry(&basis, al, Side::Left, m, n).unwrap();
            prop_assert!((sign * a - o).abs() <= 1e-8f64.max(1e-12 * o.abs()), "{} vs {}", sign * a, o);
        }
    }
}
