//! Loads the built-in maps, checks their generating functions and iterates
//! the pendulum map forwards and back.

use weakkam::twist::{load, parse_params, MapParams};

fn main() -> weakkam::Result<()> {
    for name in ["integrable", "pendulum", "standard", "conjugated"] {
        let entry = load(name, &MapParams::new())?;
        let r = &entry.report;
        println!(
            "{name:<11} periodic {} twist {} superlinear {} derivatives {}",
            r.periodic(),
            r.twist(),
            r.superlinear(),
            r.derivatives_consistent()
        );
    }

    let entry = load("pendulum", &parse_params("t0=0.1")?)?;
    let (mut theta, mut r) = (0.3, 0.5);
    for k in 1..=5 {
        (theta, r) = entry.map.map_forward(theta, r)?;
        println!("f^{k}: theta {theta:.6} r {r:.6}");
    }
    for _ in 0..5 {
        (theta, r) = entry.map.map_inverse(theta, r)?;
    }
    println!("back to theta {theta:.12} r {r:.12}");
    Ok(())
}
