//! Three routes to the fractional integral of a polynomial: the power-rule
//! closed form, direct Riemann–Liouville quadrature, and the coefficient-space
//! matrix product.
//!
//! Run with `cargo run --release --example fractional_integral`.

use jacfrac::fracops::{apply_coeff, power_closed_form, rl_quadrature, FracOrder, Side};
use jacfrac::jacobi::JacobiBasis;
use jacfrac::quadrature::{analyze, synthesize};

fn main() -> jacfrac::Result<()> {
    let basis = JacobiBasis::legendre(0.0, 1.0)?;
    let order = FracOrder::integral(0.5)?;
    let f = |x: f64| x * x;
    let pt = power_closed_form(2.0, order, Side::Left)?;
    println!("I^(1/2) x^2 = {:.12} x^{}", pt.coefficient, pt.exponent);

    let psi = analyze(f, &basis, 2)?;
    for n_out in [8, 32, 128] {
        let img = apply_coeff(&psi, order, Side::Left, n_out)?;
        let worst = [0.1, 0.3, 0.5, 0.7, 0.9]
            .iter()
            .map(|&x| (synthesize(&img, x).unwrap() - pt.coefficient * x.powf(pt.exponent)).abs())
            .fold(0.0, f64::max);
        println!("coefficient route, N_out = {n_out:3}: max pointwise error {worst:.2e}");
    }

    for x in [0.25, 0.75] {
        let q = rl_quadrature(f, order, Side::Left, x, &basis)?;
        let exact = pt.coefficient * x.powf(pt.exponent);
        println!("quadrature at x = {x}: {q:.15} (closed form {exact:.15})");
    }
    Ok(())
}
