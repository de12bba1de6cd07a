//! Solves `u = T^c u + α(c)` for the integrable map and compares with the
//! closed-form `α(c) = c² / 2`.

use weakkam::lax_oleinik::{CircleGrid, Discretization, SolveOptions};
use weakkam::twist::{load, MapParams};

fn main() -> weakkam::Result<()> {
    let entry = load("integrable", &MapParams::new())?;
    let truth = entry.analytic_truth.clone().expect("integrable map has a closed form");
    let disc = Discretization::new(entry.map.generating_arc(), CircleGrid::new(256)?);
    disc.prepare(-1.0, 1.0)?;

    for c in [-0.75, -0.2, 0.0, 0.4, 1.0] {
        let sol = disc.solve(c, &SolveOptions::default())?;
        let exact = truth.alpha(c).unwrap();
        println!(
            "c {c:>5}: alpha {:.12} exact {exact:.12} residual {:.1e} iterations {}",
            sol.alpha, sol.residual, sol.iterations
        );
    }
    Ok(())
}
