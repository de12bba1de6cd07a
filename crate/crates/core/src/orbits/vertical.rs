use crate::circle::{circle_dist, wrap};
use crate::error::{Error, Result};
use crate::pseudograph::FullPseudograph;
use crate::twist::TwistMap;

/// The `r` with `F(θ, r)` on `pg`, by bracketing and bisection on the
/// position of the image relative to `pg`.
fn hit(map: &TwistMap, pg: &FullPseudograph, theta: f64) -> Result<f64> {
    let pos = |r: f64| -> Result<f64> {
        let (x, p) = map.map_forward(theta, r)?;
        Ok(pg.position(wrap(x), p))
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    let (mut p_lo, mut p_hi) = (pos(lo)?, pos(hi)?);
    let mut tries = 0;
    while (p_lo > 0.0 || p_hi < 0.0) && tries < 40 {
        if p_lo > 0.0 {
            lo -= hi - lo;
            p_lo = pos(lo)?;
        }
        if p_hi < 0.0 {
            hi += hi - lo;
            p_hi = pos(hi)?;
        }
        tries += 1;
    }
    if p_lo > 0.0 || p_hi < 0.0 {
        return Err(Error::NonBracketing(format!("image of the vertical at {theta} misses PG({})", pg.c)));
    }
    for _ in 0..200 {
        if hi - lo < 1e-13 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let p = pos(mid)?;
        if p == 0.0 {
            return Ok(mid);
        }
        if p < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Candidates `(x, p) ∈ F(V_θ)` whose backward orbit can be minimizing with the
/// rotation number of the given pseudographs: one point of `F(V_θ) ∩ PG` per
/// pseudograph (the end points of a plateau, or a single one), merged when
/// closer than `tol`.
pub fn twisted_vertical_minimizers(
    map: &TwistMap,
    pseudographs: &[&FullPseudograph],
    theta: f64,
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for pg in pseudographs {
        let r = hit(map, pg, theta)?;
        let (x, p) = map.map_forward(theta, r)?;
        let pt = (wrap(x), p);
        if !out.iter().any(|q| circle_dist(q.0, pt.0).hypot(q.1 - pt.1) <= tol) {
            out.push(pt);
        }
    }
    if out.len() > 2 {
        return Err(Error::InvalidInput(format!(
            "{} candidate points on the twisted vertical at {theta}",
            out.len()
        )));
    }
    out.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(out)
}
