use super::build::FullPseudograph;

/// Points along the polyline spaced at most `step` apart.
fn densify(poly: &[(f64, f64)], step: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(poly.len() * 2);
    for w in poly.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        let k = (len / step).ceil().max(1.0) as usize;
        for j in 0..k {
            let t = j as f64 / k as f64;
            out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }
    out
}

fn point_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (x, y) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - x).powi(2) + (p.1 - y).powi(2)).sqrt()
}

/// Distance from `p` to the polyline `poly` (one period, non-decreasing in `θ`)
/// on the flat cylinder. Only segments whose `θ` range comes within the
/// current best distance are examined.
pub(crate) fn point_to_polyline(p: (f64, f64), poly: &[(f64, f64)], bound: f64) -> f64 {
    let x0 = poly[0].0;
    let mut best = bound;
    for shift in [-1.0, 0.0, 1.0] {
        let q = (p.0 - shift, p.1);
        if q.0 + best < x0 || q.0 - best > x0 + 1.0 {
            continue;
        }
        let start = poly.partition_point(|v| v.0 < q.0 - best).saturating_sub(1).max(1);
        for j in start..poly.len() {
            let (a, b) = (poly[j - 1], poly[j]);
            if a.0 > q.0 + best {
                break;
            }
            best = best.min(point_segment(q, a, b));
        }
    }
    best
}

fn directed(a: &FullPseudograph, b: &FullPseudograph, step: f64) -> f64 {
    densify(&a.polyline, step)
        .into_iter()
        .map(|p| {
            let (lo, hi) = b.fiber_at(p.0);
            let vertical = if p.1 > hi {
                p.1 - hi
            } else if p.1 < lo {
                lo - p.1
            } else {
                0.0
            };
            point_to_polyline(p, &b.polyline, vertical + 1e-12)
        })
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two full pseudographs, with the flat
/// product metric on the cylinder. Polyline segments are sampled at a quarter
/// of the finer grid step.
pub fn hausdorff_distance(a: &FullPseudograph, b: &FullPseudograph) -> f64 {
    let step = 0.25 / a.n().max(b.n()) as f64;
    directed(a, b, step).max(directed(b, a, step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lax_oleinik::{CircleGrid, WeakKamSolution};
    use crate::pseudograph::build_pseudograph;

    fn flat(c: f64) -> FullPseudograph {
        let grid = CircleGrid::new(64).unwrap();
        build_pseudograph(&WeakKamSolution::from_values(c, grid, vec![0.0; 64], 0.0, 0.0), 1e-6)
    }

    #[test]
    fn horizontal_circles() {
        assert_eq!(hausdorff_distance(&flat(0.3), &flat(0.3)), 0.0);
        assert!((hausdorff_distance(&flat(0.3), &flat(-0.45)) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn distance_wraps_around_the_circle() {
        let poly = [(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        assert!((point_to_polyline((0.95, 0.5), &poly, f64::INFINITY) - 0.05).abs() < 1e-12);
    }
}
