//! Symmetry of the unsigned operational matrix on ultraspherical bases:
//! exact for Legendre, broken once the weight is nontrivial.
//!
//! Run with `cargo run --release --example symmetry`.

use jacfrac::jacobi::JacobiBasis;
use jacfrac::opmatrix::check_ultraspherical_symmetry;

fn main() -> jacfrac::Result<()> {
    for beta in [0.0, 0.3, 0.5, -0.5] {
        let basis = JacobiBasis::new(-1.0, 1.0, beta, beta)?;
        let r = check_ultraspherical_symmetry(&basis, 0.5, 12)?;
        println!(
            "beta = gamma = {beta:4}: max |A_mn - A_nm| = {:.2e}, parity blocks even {:.2e} odd {:.2e}",
            r.max_asymmetry, r.even_block_asymmetry, r.odd_block_asymmetry
        );
    }
    Ok(())
}
