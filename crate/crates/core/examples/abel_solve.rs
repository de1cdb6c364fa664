//! Solving the Abel equation I^α ψ = f in coefficient space, with the
//! decay diagnosis of the solution and the residual check.
//!
//! Run with `cargo run --release --example abel_solve`.

use jacfrac::abel::{estimate_decay, residual, solve};
use jacfrac::fracops::{apply_coeff, FracOrder, Side};
use jacfrac::jacobi::JacobiBasis;
use jacfrac::quadrature::CoeffVector;

fn main() -> jacfrac::Result<()> {
    let basis = JacobiBasis::legendre(-1.0, 1.0)?;
    let alpha = 0.75;
    // a manufactured solution with geometric coefficient decay
    let psi = CoeffVector::new(basis, (0..=24).map(|n| 0.5f64.powi(n)).collect())?;
    let f = apply_coeff(&psi, FracOrder::integral(alpha)?, Side::Left, 128)?;

    let sol = solve(&f, alpha, 24)?;
    let err = sol.coeffs()[..16]
        .iter()
        .zip(psi.coeffs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("recovered leading 16 coefficients, max error {err:.2e}");

    let r = residual(&f, &sol, alpha)?;
    println!("residual: coefficient norm {:.2e}, pointwise sup {:.2e}", r.coefficient_norm, r.pointwise_sup);

    let decay = estimate_decay(&sol, Some(4..=15))?;
    println!(
        "decay: lambda_hat = {:.2}, regime {}, q_bound {:?}",
        decay.lambda_hat,
        decay.regime,
        decay.q_bound.value()
    );
    Ok(())
}
