//! How coefficient decay m^{−λ} maps to the integrability regime of an Abel
//! solution, and the weighted summability test Ω_q.
//!
//! Run with `cargo run --example decay_regimes`.

use jacfrac::abel::{estimate_decay, integrability_s, zm_condition};
use jacfrac::jacobi::JacobiBasis;
use jacfrac::quadrature::CoeffVector;

fn main() -> jacfrac::Result<()> {
    let basis = JacobiBasis::legendre(-1.0, 1.0)?;
    println!("Legendre basis: s = {}", integrability_s(&basis));
    for lambda in [0.3, 0.8, 1.0, 1.4, 2.0] {
        let c: Vec<f64> = (0..=40).map(|m| if m == 0 { 1.0 } else { (m as f64).powf(-lambda) }).collect();
        let c = CoeffVector::new(basis, c)?;
        let r = estimate_decay(&c, None)?;
        let zm = zm_condition(&c, 3.0, None)?;
        println!(
            "lambda = {lambda}: fitted {:.4}, regime {:<11} q_bound {:<22} Omega_3 {:.3} convergent {}",
            r.lambda_hat,
            r.regime.to_string(),
            format!("{:?}", r.q_bound.value()),
            zm.omega_q,
            zm.convergent
        );
    }
    Ok(())
}
