//! Minimizing periodic orbits of the standard map and the Aubry-Mather
//! squeeze bounds around them.

use weakkam::orbits::mather_set;
use weakkam::twist::{load, parse_params};

fn main() -> weakkam::Result<()> {
    let entry = load("standard", &parse_params("k=0.9")?)?;
    for (p, q) in [(0, 1), (1, 3), (2, 5)] {
        let m = mather_set(entry.generating(), p, q, 8, 1)?;
        println!("{p}/{q}: rotation {:.4}, points {:?}", m.rotation(), m.points);
        let x = 0.37;
        // nearest lifts of Mather points on each side of x
        println!("   between orbits around {x}: [{:.5}, {:.5}]", m.y_minus(x), m.y_plus(x));
        let seg = m.orbit_segment(entry.generating(), 0, 3 * q as usize);
        println!("   own orbit squeeze defect {:.1e}", m.squeeze_defect(&seg));
    }
    Ok(())
}
