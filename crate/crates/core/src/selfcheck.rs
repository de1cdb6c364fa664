//! Reduced-size consistency suites behind `jacfrac selfcheck`.
//!
//! Each suite compares two independent computations and reports the worst
//! discrepancy against a fixed tolerance. Output is deterministic.

use rayon::prelude::*;

use crate::abel::solve;
use crate::error::Result;
use crate::fracops::{apply_signed, Side};
use crate::jacobi::JacobiBasis;
use crate::opmatrix::{a_entry, assemble, oracle_entry};
use crate::quadrature::CoeffVector;

/// Deliberate corruption used to confirm that a suite has teeth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flips the sign of the normalisation factor of one basis element,
    /// which negates one column of the unsigned matrix.
    DeltaSign,
}

/// Column hit by [`Fault::DeltaSign`].
const FAULT_COLUMN: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl SuiteResult {
    fn new(name: &'static str, worst: Result<f64>, tolerance: f64) -> Self {
        match worst {
            Ok(w) => SuiteResult {
                name,
                passed: w <= tolerance,
                worst: w,
                tolerance,
                detail: format!("max_err={w:.3e} tol={tolerance:.0e}"),
            },
            Err(e) => SuiteResult {
                name,
                passed: false,
                worst: f64::NAN,
                tolerance,
                detail: format!("error: {e}"),
            },
        }
    }
}

fn check_bases() -> Vec<JacobiBasis> {
    [(0.0, 1.0, 0.0, 0.0), (-1.0, 1.0, 0.5, 0.5), (0.0, 1.0, -0.5, 0.0), (-1.0, 1.0, 0.3, 0.3)]
        .iter()
        .map(|&(a, b, be, ga)| JacobiBasis::new(a, b, be, ga).expect("valid basis"))
        .collect()
}

/// Matrix entries against the independent double-Taylor oracle.
fn oracle_suite() -> Result<f64> {
    let mut cases = Vec::new();
    for basis in check_bases() {
        for alpha in [0.5, -0.25] {
            for side in [Side::Left, Side::Right] {
                for m in 0..=6 {
                    for n in 0..=6 {
                        cases.push((basis, alpha, side, m, n));
                    }
                }
            }
        }
    }
    let errs = cases
        .par_iter()
        .map(|(basis, alpha, side, m, n)| {
            let got = assemble(basis, *alpha, *side, 6)?.entry(*m, *n);
            let want = oracle_entry(basis, *alpha, *side, *m, *n)?;
            Ok((got - want).abs() / want.abs().max(1.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(errs.into_iter().fold(0.0, f64::max))
}

/// The α = 0 matrix is the identity on every basis and side.
fn identity_suite() -> Result<f64> {
    let mut worst = 0.0f64;
    for basis in check_bases() {
        for side in [Side::Left, Side::Right] {
            let m = assemble(&basis, 0.0, side, 10)?;
            for i in 0..=10 {
                for j in 0..=10 {
                    let id = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((m.entry(i, j) - id).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Symmetry A_{mn} = A_{nm} of the unsigned Legendre matrix.
fn symmetry_suite(fault: Option<Fault>) -> Result<f64> {
    let basis = JacobiBasis::legendre(-1.0, 1.0)?;
    let n = 8;
    let mut worst = 0.0f64;
    for alpha in [0.25, 0.5] {
        let entry = |m: usize, k: usize| -> Result<f64> {
            let v = a_entry(&basis, alpha, m, k)?;
            Ok(if fault == Some(Fault::DeltaSign) && k == FAULT_COLUMN { -v } else { v })
        };
        for m in 0..=n {
            for k in 0..m {
                worst = worst.max((entry(m, k)? - entry(k, m)?).abs());
            }
        }
    }
    Ok(worst)
}

/// Abel round trip: D^α I^α ψ recovers ψ on a leading block.
fn round_trip_suite() -> Result<f64> {
    let basis = JacobiBasis::legendre(-1.0, 1.0)?;
    let psi = CoeffVector::new(basis, (0..=16).map(|n| 0.5f64.powi(n)).collect())?;
    let mut worst = 0.0f64;
    for alpha in [0.25, 0.5, 0.75] {
        let f = apply_signed(&psi, alpha, Side::Left, 96)?;
        let back = solve(&f, alpha, 16)?;
        for (x, y) in back.coeffs().iter().zip(psi.coeffs()).take(9) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

/// Runs every suite; `fault` corrupts the symmetry suite's input.
pub fn run_selfcheck(fault: Option<Fault>) -> Vec<SuiteResult> {
    vec![
        SuiteResult::new("oracle-equivalence", oracle_suite(), 1e-8),
        SuiteResult::new("identity-at-zero-order", identity_suite(), 1e-8),
        SuiteResult::new("ultraspherical-symmetry", symmetry_suite(fault), 1e-8),
        SuiteResult::new("abel-round-trip", round_trip_suite(), 1e-6),
    ]
}
