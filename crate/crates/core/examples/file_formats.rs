//! Coefficient and matrix files: JSON round-trips bit for bit, CSV keeps
//! 17 significant digits.
//!
//! Run with `cargo run --example file_formats`.

use jacfrac::fracops::Side;
use jacfrac::io::{read_coeffs, read_matrix, write_coeffs, write_matrix, Format};
use jacfrac::jacobi::JacobiBasis;
use jacfrac::opmatrix::assemble;
use jacfrac::quadrature::analyze;

fn main() -> jacfrac::Result<()> {
    let basis = JacobiBasis::new(0.0, 2.0, 0.5, -0.5)?;
    let c = analyze(f64::sin, &basis, 5)?;
    let json = write_coeffs(&c, Format::Json);
    print!("{json}");
    assert_eq!(read_coeffs(&json, None)?, c);

    let m = assemble(&basis, 0.25, Side::Right, 2)?;
    let csv = write_matrix(&m, Format::Csv);
    print!("{csv}");
    let back = read_matrix(&csv)?;
    println!("matrix CSV round trip equal: {}", back.entries() == m.entries());
    Ok(())
}
