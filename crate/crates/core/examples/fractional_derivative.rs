//! The fractional derivative of smooth functions by the boundary-term
//! formula D^α f = f(a)(x−a)^{−α}/Γ(1−α) + I^{1−α} f′, checked against the
//! power rule, and the derivative matrix undoing the integral matrix.
//!
//! Run with `cargo run --release --example fractional_derivative`.

use jacfrac::fracops::{apply_signed, power_closed_form, smooth_derivative, FracOrder, Side};
use jacfrac::jacobi::JacobiBasis;
use jacfrac::quadrature::CoeffVector;

fn main() -> jacfrac::Result<()> {
    let basis = JacobiBasis::legendre(0.0, 1.0)?;
    let order = FracOrder::derivative(0.5)?;
    let pt = power_closed_form(1.0, order, Side::Left)?;
    for x in [0.1, 0.5, 0.9] {
        let d = smooth_derivative(|t| 3.0 + t, |_| 1.0, order, Side::Left, x, &basis)?;
        let exact = 3.0 / (std::f64::consts::PI * x).sqrt() + pt.coefficient * x.powf(pt.exponent);
        println!("D^(1/2)(3 + x) at {x}: {d:.15} (closed form {exact:.15})");
    }

    // D^α I^α = id on a leading block, given enough intermediate degrees
    let psi = CoeffVector::new(basis, vec![1.0, -0.5, 0.25, 0.125])?;
    let f = apply_signed(&psi, 0.5, Side::Left, 128)?;
    let back = apply_signed(&f, order.signed(), Side::Left, 3)?;
    println!("psi          = {:?}", psi.coeffs());
    println!("D^a I^a psi  = {:?}", back.coeffs());
    Ok(())
}
