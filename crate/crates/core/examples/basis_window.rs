//! The range of p for which the Jacobi system is a basis of the weighted
//! L_p space, and the admissibility window used by the boundedness lemma.
//!
//! Run with `cargo run --example basis_window`.

use jacfrac::jacobi::{basis_range, lemma1_admissible};

fn main() -> jacfrac::Result<()> {
    for (b, g) in [(0.0, 0.0), (0.5, 0.5), (-0.5, -0.5), (-0.5, 0.5), (0.3, 0.1)] {
        let r = basis_range(b, g)?;
        println!("beta = {b:4}, gamma = {g:4}: basis for {:.4} < p < {:.4}", r.lower, r.upper);
    }
    println!();
    for (b, g, p) in [(0.0, 0.0, 2.0), (0.0, 0.0, 4.0), (0.8, 0.0, 2.0), (-0.5, -0.5, 10.0)] {
        println!("lemma1_admissible({b}, {g}, p = {p}) = {}", lemma1_admissible(b, g, p));
    }
    Ok(())
}
