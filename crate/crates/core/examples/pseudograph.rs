//! Full pseudographs of the pendulum at a few classes, inside the
//! rotation-zero plateau and beyond it, with Hausdorff distances between
//! neighbours.

use weakkam::lax_oleinik::{CircleGrid, Discretization, SolveOptions};
use weakkam::pseudograph::{build_pseudograph, default_gap_tol, hausdorff_distance};
use weakkam::twist::{load, parse_params};

fn main() -> weakkam::Result<()> {
    let entry = load("pendulum", &parse_params("t0=0.1")?)?;
    let disc = Discretization::new(entry.map.generating_arc(), CircleGrid::new(512)?);
    disc.prepare(-2.0, 2.0)?;

    let mut previous = None;
    for c in [0.0, 0.6, 1.6, 1.7] {
        let sol = disc.solve(c, &SolveOptions::default())?;
        let pg = build_pseudograph(&sol, default_gap_tol(&sol));
        println!("c {c}: {} jumps, winding {}", pg.jumps.len(), pg.winding_number());
        for j in &pg.jumps {
            println!("   at theta {:.4}: {:.4} down to {:.4}", j.theta, j.top, j.bottom);
        }
        if let Some(prev) = &previous {
            println!("   distance to previous {:.4}", hausdorff_distance(prev, &pg));
        }
        previous = Some(pg);
    }
    Ok(())
}
