//! Gauss–Jacobi quadrature: nodes and weights for the weight
//! (x−a)^β (b−x)^γ, and exactness on polynomials.
//!
//! Run with `cargo run --example gauss_jacobi`.

use jacfrac::jacobi::JacobiBasis;
use jacfrac::quadrature::gauss_jacobi;
use jacfrac::special::beta;

fn main() -> jacfrac::Result<()> {
    let basis = JacobiBasis::new(0.0, 1.0, -0.5, 0.5)?;
    let rule = gauss_jacobi(&basis, 6)?;
    println!("6-point rule for weight x^-1/2 (1-x)^1/2 on [0, 1]");
    for (x, w) in rule.nodes().iter().zip(rule.weights()) {
        println!("  x = {x:.15}  w = {w:.15}");
    }

    // ∫ x^k x^{-1/2} (1-x)^{1/2} dx = B(k + 1/2, 3/2), exact for k ≤ 11
    for k in [0, 3, 11] {
        let got = rule.integrate(|x| x.powi(k));
        let want = beta(k as f64 + 0.5, 1.5)?.to_f64();
        println!("  k = {k:2}: rule {got:.15e}, Beta {want:.15e}, diff {:.1e}", (got - want).abs());
    }
    Ok(())
}
