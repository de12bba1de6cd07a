//! Every point of the annulus lies on some full pseudograph: locate the class
//! for a handful of points.

use weakkam::lax_oleinik::{CircleGrid, Discretization, SolveOptions};
use weakkam::pseudograph::{build_pseudograph, covering_locate, default_gap_tol};
use weakkam::twist::{load, MapParams};

fn main() -> weakkam::Result<()> {
    let entry = load("integrable", &MapParams::new())?;
    let disc = Discretization::new(entry.map.generating_arc(), CircleGrid::new(256)?);
    disc.prepare(-3.0, 3.0)?;
    let opts = SolveOptions::default();

    for (theta, r) in [(0.1, -1.3), (0.4, 0.0), (0.75, 0.55), (0.9, 2.1)] {
        let hit = covering_locate(
            |c| {
                let sol = disc.solve(c, &opts)?;
                Ok(build_pseudograph(&sol, default_gap_tol(&sol)))
            },
            theta,
            r,
            (-1.0, 1.0),
            1e-6,
        )?;
        println!(
            "({theta}, {r}) lies on PG(c) for c = {:.8}, distance {:.1e}, {} solves",
            hit.c, hit.distance, hit.probes
        );
    }
    Ok(())
}
