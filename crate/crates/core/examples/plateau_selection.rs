//! Refines the rotation-zero plateau of the pendulum and walks across it with
//! the Lipschitz selection `c ↦ u_c`.

use weakkam::cli::{Sample, Study, StudyConfig};
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
    let plateau = study.main_plateau().expect("the pendulum has a plateau at rho = 0");
    println!(
        "rho = {}/{} on [{:.6}, {:.6}], Mather points {:?}",
        plateau.p, plateau.q, plateau.a, plateau.b, plateau.mather_points
    );

    let (a, b) = (plateau.a, plateau.b);
    let cs: Vec<f64> = (0..=8).map(|k| a + (b - a) * k as f64 / 8.0).collect();
    let samples: Vec<Sample> = study.samples(&cs)?;
    for pair in samples.windows(2) {
        let du = pair[0]
            .sol
            .u
            .iter()
            .zip(&pair[1].sol.u)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        println!(
            "c {:+.4} -> {:+.4}: |u - u'| {:.4} <= |dc| {:.4}, jumps at {:?}",
            pair[0].c(),
            pair[1].c(),
            du,
            pair[1].c() - pair[0].c(),
            pair[1].pg.jumps.iter().map(|j| (j.theta * 1e4).round() / 1e4).collect::<Vec<_>>()
        );
    }
    Ok(())
}
