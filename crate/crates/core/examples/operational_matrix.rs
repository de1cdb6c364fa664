//! The operational matrix of the Riemann–Liouville integral: assembly, the
//! closed-form (0,0) anchor, the left/right reflection and singular values.
//!
//! Run with `cargo run --release --example operational_matrix`.

use std::f64::consts::PI;

use jacfrac::fracops::Side;
use jacfrac::jacobi::JacobiBasis;
use jacfrac::opmatrix::{assemble, oracle_entry, singular_value_report};

fn main() -> jacfrac::Result<()> {
    let basis = JacobiBasis::legendre(0.0, 1.0)?;
    let left = assemble(&basis, 0.5, Side::Left, 6)?;
    println!("signed matrix of I^(1/2), Legendre on [0, 1], N = 6:");
    for i in 0..=6 {
        let row: Vec<String> = (0..=6).map(|j| format!("{:+.6}", left.entry(i, j))).collect();
        println!("  {}", row.join(" "));
    }
    println!("(0,0) = {:.15}, 4/(3 sqrt(pi)) = {:.15}", left.entry(0, 0), 4.0 / (3.0 * PI.sqrt()));

    // independent double-Taylor oracle
    let worst = (0..=6)
        .flat_map(|m| (0..=6).map(move |n| (m, n)))
        .map(|(m, n)| (left.entry(m, n) - oracle_entry(&basis, 0.5, Side::Left, m, n).unwrap()).abs())
        .fold(0.0, f64::max);
    println!("max |entry - oracle| = {worst:.1e}");

    // the right operator is the left one conjugated by diag((-1)^n) when beta = gamma
    let right = assemble(&basis, 0.5, Side::Right, 6)?;
    let mut refl = 0.0f64;
    for i in 0..=6 {
        for j in 0..=6 {
            let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            refl = refl.max((right.entry(i, j) - s * left.entry(i, j)).abs());
        }
    }
    println!("max |right - J left J| = {refl:.1e}");

    let sv = singular_value_report(&assemble(&basis, 0.5, Side::Left, 40)?)?;
    println!("singular values at N = 40: sigma_0 = {:.4}, sigma_20 = {:.4}, sigma_40 = {:.2e}", sv[0], sv[20], sv[40]);
    Ok(())
}
