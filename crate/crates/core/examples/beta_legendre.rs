//! Minimal average actions of periodic orbits, and the lower bound they give
//! on α through the Legendre transform.

use weakkam::alpha_rho::{beta_oracle, legendre_lower_bound};
use weakkam::twist::{load, parse_params};

fn main() -> weakkam::Result<()> {
    let entry = load("standard", &parse_params("k=0.5")?)?;
    let gf = entry.generating();

    let mut values = Vec::new();
    for (p, q) in [(0, 1), (1, 5), (1, 4), (1, 3), (2, 5), (1, 2), (3, 5), (2, 3), (1, 1)] {
        let b = beta_oracle(gf, p, q, 8, 7)?;
        println!(
            "{p}/{q}: beta {:.10}  minimizers {}  failed restarts {}",
            b.value,
            b.minimizers.len(),
            b.failed_restarts
        );
        values.push((p as f64 / q as f64, b.value));
    }
    for c in [-0.5, 0.0, 0.25, 0.5, 1.0] {
        println!("alpha({c}) >= {:.8}", legendre_lower_bound(&values, c));
    }
    Ok(())
}
