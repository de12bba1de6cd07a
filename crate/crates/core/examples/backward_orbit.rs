//! Calibrated backward orbits of a weak KAM solution, their rotation numbers
//! and how well they calibrate `u`.

use weakkam::lax_oleinik::{CircleGrid, Discretization, SolveOptions};
use weakkam::orbits::{backward_orbit, calibration_residual, grid_tol, rotation_number_of_segment};
use weakkam::twist::{load, parse_params};

fn main() -> weakkam::Result<()> {
    let entry = load("pendulum", &parse_params("t0=0.1")?)?;
    let disc = Discretization::new(entry.map.generating_arc(), CircleGrid::new(512)?);
    disc.prepare(-2.5, 2.5)?;

    for c in [0.3, 2.0] {
        let sol = disc.solve(c, &SolveOptions::default())?;
        for theta in [0.1, 0.65] {
            let seg = backward_orbit(&disc, &sol, theta, 200)?;
            // residuals accumulate along the orbit, so compare them per step
            let worst = calibration_residual(entry.generating(), &sol, &seg)
                .iter()
                .enumerate()
                .fold(0.0f64, |m, (k, r)| m.max(r.abs() / (k + 1) as f64));
            let rot = rotation_number_of_segment(&seg)?;
            println!(
                "c {c} theta {theta}: rho {:+.5} (sup deviation {:.3}), calibration {worst:.1e} per step vs grid tol {:.1e}, 200 steps back at {:?}",
                rot.estimate,
                rot.bound,
                grid_tol(&sol),
                seg.points[0]
            );
        }
    }
    Ok(())
}
