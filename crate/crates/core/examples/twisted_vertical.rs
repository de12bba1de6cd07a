//! Image of a vertical line under the pendulum map and the points on it that
//! can start a minimizing backward orbit of rotation zero.

use weakkam::cli::{Study, StudyConfig};
use weakkam::orbits::twisted_vertical_minimizers;
use weakkam::pseudograph::{build_pseudograph, default_gap_tol};
use weakkam::twist::{load, parse_params};

fn main() -> weakkam::Result<()> {
    let entry = load("pendulum", &parse_params("t0=0.1")?)?;
    let cfg = StudyConfig {
        grid: 256,
        range: (-1.6, 1.6),
        steps: 161,
        ..StudyConfig::default()
    };
    let study = Study::new(entry, &cfg)?;
    let plateau = study.main_plateau().expect("rotation-zero plateau");
    let pg = |s: &Option<weakkam::lax_oleinik::WeakKamSolution>| {
        let s = s.as_ref().expect("refined plateau keeps its end solutions");
        build_pseudograph(s, default_gap_tol(s))
    };
    let (pga, pgb) = (pg(&plateau.u_a), pg(&plateau.u_b));

    for theta in [0.05, 0.2, 0.3, 0.45, 0.6] {
        let pts = twisted_vertical_minimizers(&study.entry.map, &[&pga, &pgb], theta, 4.0 / 256.0)?;
        println!("theta {theta}: {} candidates {:?}", pts.len(), pts);
    }
    Ok(())
}
