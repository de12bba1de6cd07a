//! Samples α and ρ = α' for the pendulum and reports the flat pieces of α,
//! the rational plateaus.

use weakkam::alpha_rho::{detect_plateaus, sample_alpha_curve};
use weakkam::lax_oleinik::{CircleGrid, Discretization, SolveOptions};
use weakkam::twist::{load, parse_params};

fn main() -> weakkam::Result<()> {
    let entry = load("pendulum", &parse_params("t0=0.1")?)?;
    let disc = Discretization::new(entry.map.generating_arc(), CircleGrid::new(256)?);
    let range = (-2.0, 2.0);
    disc.prepare(range.0, range.1)?;

    let curve = sample_alpha_curve(&disc, range, 81, &SolveOptions::grid_only())?;
    for k in (0..curve.len()).step_by(10) {
        let c = curve.c_samples[k];
        println!("c {c:>6.2}  alpha {:.6}  rho {:.4}", curve.alpha_values[k], curve.rho_values[k]);
    }
    for p in detect_plateaus(&curve, 4, 1e-4) {
        println!("plateau rho = {}/{} on [{:.3}, {:.3}]", p.p, p.q, p.a, p.b);
    }
    Ok(())
}
