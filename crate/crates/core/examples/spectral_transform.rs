//! Analysis and synthesis in an orthonormal Jacobi basis: the coefficients
//! of a smooth and of a less smooth function, and the reconstruction error.
//!
//! Run with `cargo run --example spectral_transform`.

use jacfrac::jacobi::JacobiBasis;
use jacfrac::quadrature::{analyze, synthesize};

fn main() -> jacfrac::Result<()> {
    let basis = JacobiBasis::legendre(-1.0, 1.0)?;
    let runge = |x: f64| 1.0 / (1.0 + 25.0 * x * x);

    for (name, f) in [("exp", &f64::exp as &dyn Fn(f64) -> f64), ("runge", &runge)] {
        println!("{name}:");
        for n in [8, 16, 32, 64] {
            let c = analyze(f, &basis, n)?;
            let err = (0..=200)
                .map(|i| -1.0 + i as f64 / 100.0)
                .map(|x| (synthesize(&c, x).unwrap() - f(x)).abs())
                .fold(0.0, f64::max);
            println!("  N = {n:2}: |c_N| = {:.2e}, max reconstruction error {err:.2e}", c.coeffs()[n].abs());
        }
    }
    Ok(())
}
