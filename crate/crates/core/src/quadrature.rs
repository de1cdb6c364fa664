//! Gauss–Jacobi quadrature, the analysis/synthesis transforms and weighted
//! L_p norms.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::jacobi::JacobiBasis;
use crate::special::CompensatedSum;

/// Largest rule `gauss_jacobi` will build.
pub const MAX_QUADRATURE_ORDER: usize = 512;

/// An N-point Gauss rule for ∫ f ω dx on the basis interval.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    basis: JacobiBasis,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn basis(&self) -> &JacobiBasis {
        &self.basis
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Σ w_i f(x_i) ≈ ∫ f ω dx.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .collect::<CompensatedSum>()
            .value()
    }
}

/// Golub–Welsch: nodes are the eigenvalues of the Jacobi matrix, weights
/// come from the Christoffel function at each node.
pub fn gauss_jacobi(basis: &JacobiBasis, n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::OrderRange("quadrature order must be at least 1".into()));
    }
    if n > MAX_QUADRATURE_ORDER {
        return Err(Error::Resource {
            requested: n,
            max: MAX_QUADRATURE_ORDER,
        });
    }
    let mut jm = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jm[(i, i)] = basis.recurrence_diag(i);
        if i + 1 < n {
            let off = basis.recurrence_offdiag(i + 1);
            jm[(i, i + 1)] = off;
            jm[(i + 1, i)] = off;
        }
    }
    let mut t: Vec<f64> = SymmetricEigen::new(jm).eigenvalues.iter().cloned().collect();
    t.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));

    // reference orthonormal values: p_k(x) = scale · q_k(t)
    let half = 0.5 * (basis.b() - basis.a());
    let scale = half.powf(-0.5 * (basis.beta() + basis.gamma() + 1.0));
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &ti in &t {
        let ti = ti.clamp(-1.0, 1.0);
        let x = basis.from_reference(ti).clamp(basis.a(), basis.b());
        let vals = basis.eval_all_unchecked(n - 1, x);
        let christoffel: f64 = vals.iter().map(|v| (v / scale).powi(2)).sum();
        nodes.push(x);
        weights.push(half.powf(basis.beta() + basis.gamma() + 1.0) / christoffel);
    }
    Ok(QuadratureRule {
        basis: *basis,
        nodes,
        weights,
    })
}

/// Truncated Jacobi coefficients f_0, ..., f_N of a function.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    basis: JacobiBasis,
    coeffs: Vec<f64>,
}

impl CoeffVector {
    pub fn new(basis: JacobiBasis, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::OrderRange("coefficient vector is empty".into()));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::domain(format!("coefficient {i} is not finite")));
        }
        Ok(CoeffVector { basis, coeffs })
    }

    /// Unit vector e_n of length `len`.
    pub fn unit(basis: JacobiBasis, n: usize, len: usize) -> Self {
        let mut coeffs = vec![0.0; len.max(n + 1)];
        coeffs[n] = 1.0;
        CoeffVector { basis, coeffs }
    }

    pub fn basis(&self) -> &JacobiBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Highest index N.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// The partial sum S_k f with k = N, evaluated at x.
    pub fn eval(&self, x: f64) -> Result<f64> {
        synthesize(self, x)
    }

    /// Coefficients 0..=n, zero-padded if this vector is shorter.
    pub fn truncated(&self, n: usize) -> CoeffVector {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n + 1, 0.0);
        CoeffVector {
            basis: self.basis,
            coeffs,
        }
    }

    pub(crate) fn ensure_same_basis(&self, other: &JacobiBasis) -> Result<()> {
        if &self.basis == other {
            Ok(())
        } else {
            Err(Error::BasisMismatch(format!(
                "{:?} vs {:?}",
                self.basis, other
            )))
        }
    }
}

/// Sampled data (x_i, y_i) with strictly increasing x.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl GridFunction {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::Interpolation("at least two samples are required".into()));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Interpolation(format!(
                    "x must be strictly increasing (samples {} and {})",
                    i + 1,
                    i + 2
                )));
            }
        }
        if samples.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Interpolation("samples must be finite".into()));
        }
        let (xs, ys) = samples.into_iter().unzip();
        Ok(GridFunction { xs, ys })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Barycentric polynomial interpolant through all samples.
    pub fn interpolant(&self) -> Barycentric {
        Barycentric::new(&self.xs, &self.ys)
    }
}

/// Second-form barycentric interpolation on arbitrary nodes.
#[derive(Debug, Clone)]
pub struct Barycentric {
    xs: Vec<f64>,
    ys: Vec<f64>,
    weights: Vec<f64>,
}

impl Barycentric {
    pub fn new(xs: &[f64], ys: &[f64]) -> Self {
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        // differences measured in units of the logarithmic capacity (hi−lo)/4
        let c = 4.0 / (hi - lo);
        let weights = (0..xs.len())
            .map(|j| {
                let prod: f64 = (0..xs.len())
                    .filter(|&k| k != j)
                    .map(|k| c * (xs[j] - xs[k]))
                    .product();
                1.0 / prod
            })
            .collect();
        Barycentric {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            weights,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&xj, &yj), &wj) in self.xs.iter().zip(&self.ys).zip(&self.weights) {
            let d = x - xj;
            if d == 0.0 {
                return yj;
            }
            let t = wj / d;
            num += t * yj;
            den += t;
        }
        num / den
    }
}

/// Default analysis rule size for N+1 coefficients.
pub fn default_analysis_order(n: usize) -> usize {
    (2 * n).max(n + 1)
}

/// Coefficients f_n = ∫ f p_n ω dx for n = 0..=N.
pub fn analyze<F: Fn(f64) -> f64>(f: F, basis: &JacobiBasis, n: usize) -> Result<CoeffVector> {
    analyze_with_order(f, basis, n, default_analysis_order(n))
}

pub fn analyze_with_order<F: Fn(f64) -> f64>(
    f: F,
    basis: &JacobiBasis,
    n: usize,
    order: usize,
) -> Result<CoeffVector> {
    if order < n + 1 {
        return Err(Error::OrderRange(format!(
            "analysis rule order {order} must be at least N+1 = {}",
            n + 1
        )));
    }
    let rule = gauss_jacobi(basis, order)?;
    let mut acc = vec![CompensatedSum::new(); n + 1];
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::Evaluation(format!("f({x}) is not finite")));
        }
        for (s, p) in acc.iter_mut().zip(basis.eval_all_unchecked(n, x)) {
            s.add(w * fx * p);
        }
    }
    CoeffVector::new(*basis, acc.iter().map(|s| s.value()).collect())
}

/// Coefficients of sampled data, via barycentric interpolation on the samples.
///
/// The interpolant is one global polynomial through every sample, so it is
/// only as good as the grid: clustered (Chebyshev-like) nodes are well
/// conditioned, while long equispaced grids amplify rounding and noise
/// exponentially.
pub fn analyze_grid(grid: &GridFunction, basis: &JacobiBasis, n: usize) -> Result<CoeffVector> {
    if grid.len() < n + 1 {
        return Err(Error::Interpolation(format!(
            "{} samples cannot determine {} coefficients",
            grid.len(),
            n + 1
        )));
    }
    let (lo, hi) = (grid.xs[0], grid.xs[grid.len() - 1]);
    if lo < basis.a() || hi > basis.b() {
        return Err(Error::Interpolation(format!(
            "samples span [{lo}, {hi}], outside [{}, {}]",
            basis.a(),
            basis.b()
        )));
    }
    let interp = grid.interpolant();
    analyze(|x| interp.eval(x), basis, n)
}

/// Σ c_n p_n(x) by Clenshaw's backward recurrence.
pub fn synthesize(c: &CoeffVector, x: f64) -> Result<f64> {
    let basis = c.basis();
    if !basis.interval().contains(x) {
        return Err(Error::domain(format!(
            "x = {x} outside [{}, {}]",
            basis.a(),
            basis.b()
        )));
    }
    let t = basis.to_reference(x);
    let n = c.degree();
    let coeffs = c.coeffs();
    // q_{k+1} = α_k q_k + β_k q_{k-1},  α_k = (t − a_k)/b_{k+1},  β_k = −b_k/b_{k+1}
    let alpha = |k: usize| (t - basis.recurrence_diag(k)) / basis.recurrence_offdiag(k + 1);
    let beta = |k: usize| -basis.recurrence_offdiag(k) / basis.recurrence_offdiag(k + 1);
    let mut y1 = 0.0; // y_{k+1}
    let mut y2 = 0.0; // y_{k+2}
    for k in (0..=n).rev() {
        let mut y = coeffs[k];
        if k < n {
            y += alpha(k) * y1;
        }
        if k + 1 < n {
            y += beta(k + 1) * y2;
        }
        y2 = y1;
        y1 = y;
    }
    let p0 = basis.eval_all_unchecked(0, x)[0];
    Ok(p0 * y1)
}

const LP_RULE_POINTS: usize = 20;
const LP_MAX_DEPTH: usize = 48;
const LP_REL_TOL: f64 = 1e-13;

/// Weighted norm (∫ |f|^p ω dx)^{1/p} by adaptive Gauss–Jacobi panels.
///
/// The first and last panels carry the endpoint weight factor in their
/// quadrature rule; interior panels evaluate ω as part of the integrand.
pub fn weighted_lp_norm<F: Fn(f64) -> f64>(f: F, basis: &JacobiBasis, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::domain(format!("weighted_lp_norm needs p >= 1, got {p}")));
    }
    let integral = weighted_integral(|x| f(x).abs().powf(p), basis)?;
    Ok(integral.powf(1.0 / p))
}

/// Adaptive ∫ g ω dx.
pub fn weighted_integral<G: Fn(f64) -> f64>(g: G, basis: &JacobiBasis) -> Result<f64> {
    let (a, b) = (basis.a(), basis.b());
    let (be, ga) = (basis.beta(), basis.gamma());
    let rules = PanelRules::new(be, ga)?;
    let coarse = rules.panel(&g, basis, a, b, LP_RULE_POINTS);
    let scale = coarse.abs().max(f64::MIN_POSITIVE);
    let mut total = CompensatedSum::new();
    let mut stack = vec![(a, b, 0usize)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let i1 = rules.panel(&g, basis, lo, hi, LP_RULE_POINTS);
        let i2 = rules.panel(&g, basis, lo, hi, 2 * LP_RULE_POINTS);
        let width = (hi - lo) / (b - a);
        let tol = LP_REL_TOL * (i2.abs()).max(scale * width);
        if (i2 - i1).abs() <= tol || (i2 - i1).abs() <= 1e-15 * scale * width.sqrt() {
            total.add(i2);
            continue;
        }
        if depth >= LP_MAX_DEPTH {
            return Err(Error::NonConvergence(format!(
                "panel [{lo}, {hi}] still unresolved at depth {depth}"
            )));
        }
        let mid = 0.5 * (lo + hi);
        stack.push((mid, hi, depth + 1));
        stack.push((lo, mid, depth + 1));
    }
    Ok(total.value())
}

/// Reference rules on [-1, 1] for the four endpoint-weight combinations.
struct PanelRules {
    beta: f64,
    gamma: f64,
    rules: Vec<((bool, bool, usize), QuadratureRule)>,
}

impl PanelRules {
    fn new(beta: f64, gamma: f64) -> Result<Self> {
        let mut rules = Vec::new();
        for &n in &[LP_RULE_POINTS, 2 * LP_RULE_POINTS] {
            for &(l, r) in &[(false, false), (true, false), (false, true), (true, true)] {
                let basis = JacobiBasis::new(
                    -1.0,
                    1.0,
                    if l { beta } else { 0.0 },
                    if r { gamma } else { 0.0 },
                )?;
                rules.push(((l, r, n), gauss_jacobi(&basis, n)?));
            }
        }
        Ok(PanelRules { beta, gamma, rules })
    }

    fn panel<G: Fn(f64) -> f64>(&self, g: &G, basis: &JacobiBasis, lo: f64, hi: f64, n: usize) -> f64 {
        let left = lo == basis.a();
        let right = hi == basis.b();
        let rule = &self
            .rules
            .iter()
            .find(|(key, _)| *key == (left, right, n))
            .expect("all rule variants are built")
            .1;
        let el = if left { self.beta } else { 0.0 };
        let er = if right { self.gamma } else { 0.0 };
        let half = 0.5 * (hi - lo);
        let jac = half.powf(el + er + 1.0);
        let (a, b) = (basis.a(), basis.b());
        let s: CompensatedSum = rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .map(|(&t, &w)| {
                let x = lo + half * (1.0 + t);
                let mut v = g(x);
                if !left {
                    v *= (x - a).powf(self.beta);
                }
                if !right {
                    v *= (b - x).powf(self.gamma);
                }
                w * v
            })
            .collect();
        jac * s.value()
    }
}
