use serde::Serialize;

use crate::circle::wrap;
use crate::lax_oleinik::WeakKamSolution;

/// The fiber `c + ∂u(θ)` at a grid node: `[c + u'_+, c + u'_-]`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SubdifferentialInterval {
    pub theta: f64,
    /// `c` plus the right derivative.
    pub p_minus: f64,
    /// `c` plus the left derivative.
    pub p_plus: f64,
}

impl SubdifferentialInterval {
    pub fn width(&self) -> f64 {
        self.p_plus - self.p_minus
    }
}

/// A jump of `c + u'`, drawn as a vertical segment from `top` down to `bottom`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Jump {
    pub theta: f64,
    pub top: f64,
    pub bottom: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FullPseudograph {
    pub c: f64,
    pub gap_tol: f64,
    pub intervals: Vec<SubdifferentialInterval>,
    pub jumps: Vec<Jump>,
    /// Nodes whose stencils stay clear of every jump.
    pub smooth: Vec<bool>,
    /// Closed polyline `(θ, p)` with `θ` non-decreasing from the first point to
    /// the last, which repeats the first shifted by `(1, 0)`.
    pub polyline: Vec<(f64, f64)>,
}

const FIT_NODES: usize = 10;

/// Least-squares polynomial of degree `pts.len() - 1` capped at 2, as
/// coefficients of `1, x, x²`.
fn poly_fit(pts: &[(f64, f64)]) -> [f64; 3] {
    let deg = pts.len().saturating_sub(1).min(2);
    let m = deg + 1;
    let a = nalgebra::DMatrix::from_fn(pts.len(), m, |r, k| pts[r].0.powi(k as i32));
    let y = nalgebra::DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let mut out = [0.0; 3];
    if let Ok(coef) = a.svd(true, true).solve(&y, 1e-12) {
        for k in 0..m {
            out[k] = coef[k];
        }
    }
    out
}

/// Default jump threshold `5 h K`.
pub fn default_gap_tol(sol: &WeakKamSolution) -> f64 {
    5.0 * sol.grid.h() * sol.semiconcavity_k.max(1.0)
}

/// Builds the full pseudograph of `c + u'` from one-sided 3-point stencils.
/// Consecutive nodes whose interval width exceeds `gap_tol` in absolute value are
/// merged into one jump, located where the tangent lines of the two smooth
/// sides meet.
pub fn build_pseudograph(sol: &WeakKamSolution, gap_tol: f64) -> FullPseudograph {
    let n = sol.n();
    let h = sol.grid.h();
    let c = sol.c;
    let intervals: Vec<SubdifferentialInterval> = (0..n)
        .map(|i| {
            let (right, left) = sol.one_sided_derivatives(i);
            SubdifferentialInterval {
                theta: sol.grid.node(i),
                p_minus: c + right,
                p_plus: c + left,
            }
        })
        .collect();
    // stencils reaching across a kink give a wrong width of either sign
    // and reach two nodes to each side of it
    let raw: Vec<bool> = intervals.iter().map(|iv| iv.width().abs() > gap_tol).collect();
    let wide: Vec<bool> = (0..n)
        .map(|i| (0..5).any(|d| raw[(i + n + d - 2) % n]))
        .collect();
    let mid = |i: usize| 0.5 * (intervals[i].p_minus + intervals[i].p_plus);

    if wide.iter().all(|&w| w) {
        // degenerate: no smooth node to anchor on
        let polyline = (0..=n).map(|i| (i as f64 * h, mid(i % n))).collect();
        return FullPseudograph {
            c,
            gap_tol,
            intervals,
            jumps: Vec::new(),
            smooth: vec![false; n],
            polyline,
        };
    }

    // start the sweep at a thin node so that runs never wrap around the start
    let start = (0..n).find(|&i| !wide[i]).unwrap_or(0);
    let lift = |k: usize| (start + k) as f64 * h;
    let u_lift = |k: usize| sol.u[(start + k) % n];

    let mut polyline = Vec::with_capacity(n + 8);
    let mut jumps = Vec::new();
    let mut k = 0;
    while k < n {
        let i = (start + k) % n;
        if !wide[i] {
            polyline.push((lift(k), mid(i)));
            k += 1;
            continue;
        }
        let run_start = k;
        while k < n && wide[(start + k) % n] {
            k += 1;
        }
        // thin neighbours on both sides of the run
        let before = run_start - 1;
        let after = k;
        let (ib, ia) = ((start + before) % n, (start + after) % n);
        let (xb, xa) = (lift(before), lift(after));
        let (ub, ua) = (u_lift(before), u_lift(after));
        // one-sided derivatives from the clean side, fitted by a least-squares
        // quadratic over a few thin nodes and extrapolated towards the jump
        let side = |from: usize, step: isize, pick: fn(&SubdifferentialInterval) -> f64| {
            let mut pts = Vec::with_capacity(FIT_NODES);
            for j in 0..FIT_NODES as isize {
                let idx = ((from as isize + step * j).rem_euclid(n as isize)) as usize;
                if j > 1 && wide[idx] {
                    break;
                }
                pts.push(((step * j) as f64, pick(&intervals[idx]) - c));
            }
            poly_fit(&pts)
        };
        let lc = side(ib, -1, |iv| iv.p_plus);
        let rc = side(ia, 1, |iv| iv.p_minus);
        let eval = |q: &[f64; 3], t: f64| q[0] + t * (q[1] + t * q[2]);
        let d_left = |x: f64| eval(&lc, (x - xb) / h);
        let d_right = |x: f64| eval(&rc, (x - xa) / h);
        let (l0, r0) = (d_left(xb), d_right(xa));
        // branch values by integrating the derivative models (Simpson)
        let u_left = |x: f64| ub + (x - xb) / 6.0 * (l0 + 4.0 * d_left(0.5 * (x + xb)) + d_left(x));
        let u_right = |x: f64| ua - (xa - x) / 6.0 * (d_right(x) + 4.0 * d_right(0.5 * (x + xa)) + r0);
        let gap = |x: f64| u_left(x) - u_right(x);
        let x = if gap(xb) < 0.0 && gap(xa) > 0.0 {
            let (mut lo, mut hi) = (xb, xa);
            for _ in 0..60 {
                let m = 0.5 * (lo + hi);
                if gap(m) < 0.0 {
                    lo = m;
                } else {
                    hi = m;
                }
            }
            0.5 * (lo + hi)
        } else if (l0 - r0).abs() > 1e-12 {
            (((ua - r0 * xa) - (ub - l0 * xb)) / (l0 - r0)).clamp(xb, xa)
        } else {
            0.5 * (xb + xa)
        };
        let (top, bottom) = (c + d_left(x), c + d_right(x));
        polyline.push((x, top));
        polyline.push((x, bottom));
        jumps.push(Jump {
            theta: wrap(x),
            top,
            bottom,
        });
    }
    let (x0, p0) = polyline[0];
    polyline.push((x0 + 1.0, p0));
    // report the polyline starting near θ = 0
    let offset = polyline[0].0.floor();
    for pt in &mut polyline {
        pt.0 -= offset;
    }
    jumps.sort_by(|a, b| a.theta.total_cmp(&b.theta));
    FullPseudograph {
        c,
        gap_tol,
        intervals,
        jumps,
        smooth: wide.iter().map(|w| !w).collect(),
        polyline,
    }
}

impl FullPseudograph {
    pub fn n(&self) -> usize {
        self.intervals.len()
    }

    /// Nodes whose interval is at most `gap_tol` wide and whose stencils do
    /// not reach across a jump.
    pub fn thin_nodes(&self) -> impl Iterator<Item = &SubdifferentialInterval> {
        self.intervals
            .iter()
            .zip(&self.smooth)
            .filter(|(_, &s)| s)
            .map(|(iv, _)| iv)
    }

    /// `[min, max]` of the momenta where the polyline crosses the vertical at `theta`.
    pub fn fiber_at(&self, theta: f64) -> (f64, f64) {
        let x0 = self.polyline[0].0;
        let x = x0 + wrap(theta - x0);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let k = self.polyline.partition_point(|p| p.0 < x).max(1);
        let from = k.saturating_sub(2).max(1);
        let to = (k + 2).min(self.polyline.len() - 1);
        for j in from..=to {
            let (a, b) = (self.polyline[j - 1], self.polyline[j]);
            if a.0 <= x && x <= b.0 {
                if b.0 - a.0 <= 1e-15 {
                    lo = lo.min(a.1.min(b.1));
                    hi = hi.max(a.1.max(b.1));
                } else {
                    let t = (x - a.0) / (b.0 - a.0);
                    let p = a.1 + t * (b.1 - a.1);
                    lo = lo.min(p);
                    hi = hi.max(p);
                }
            }
        }
        (lo, hi)
    }

    /// Signed position of `(theta, p)`: zero inside the fiber, positive above.
    pub fn position(&self, theta: f64, p: f64) -> f64 {
        let (lo, hi) = self.fiber_at(theta);
        if p > hi {
            p - hi
        } else if p < lo {
            p - lo
        } else {
            0.0
        }
    }

    /// Flat-metric distance from `(theta, p)` to the polyline.
    pub fn distance_to(&self, theta: f64, p: f64) -> f64 {
        let x0 = self.polyline[0].0;
        let x = x0 + wrap(theta - x0);
        let bound = self.position(theta, p).abs() + 1e-15;
        super::hausdorff::point_to_polyline((x, p), &self.polyline, bound)
    }

    /// Net number of turns of the polyline around the annulus.
    pub fn winding_number(&self) -> i64 {
        let first = self.polyline[0];
        let last = self.polyline[self.polyline.len() - 1];
        ((last.0 - first.0).round()) as i64
    }

    /// Whether the polyline is closed and each vertical part goes downward.
    pub fn is_well_formed(&self) -> bool {
        let first = self.polyline[0];
        let last = self.polyline[self.polyline.len() - 1];
        let closed = (last.1 - first.1).abs() < 1e-12 && (last.0 - first.0 - 1.0).abs() < 1e-12;
        let monotone = self.polyline.windows(2).all(|w| w[1].0 >= w[0].0);
        let downward = self
            .polyline
            .windows(2)
            .filter(|w| w[1].0 == w[0].0)
            .all(|w| w[1].1 <= w[0].1);
        closed && monotone && downward
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lax_oleinik::CircleGrid;

    fn sol_from(u: Vec<f64>, c: f64) -> WeakKamSolution {
        let grid = CircleGrid::new(u.len()).unwrap();
        WeakKamSolution::from_values(c, grid, u, 0.0, 0.0)
    }

    #[test]
    fn flat_solution_gives_horizontal_circle() {
        let pg = build_pseudograph(&sol_from(vec![0.0; 64], 0.4), 1e-6);
        assert!(pg.jumps.is_empty());
        assert!(pg.polyline.iter().all(|p| (p.1 - 0.4).abs() < 1e-12));
        assert_eq!(pg.winding_number(), 1);
        assert!(pg.is_well_formed());
        assert_eq!(pg.fiber_at(0.3), (0.4, 0.4));
    }

    #[test]
    fn min_of_two_wells_has_two_downward_jumps() {
        let n = 128;
        let u: Vec<f64> = (0..n)
            .map(|i| {
                let t = std::f64::consts::PI * (i as f64 + 0.3) / n as f64;
                t.sin().powi(2).min(t.cos().powi(2))
            })
            .collect();
        let pg = build_pseudograph(&sol_from(u, 0.0), 0.5);
        assert!(pg.is_well_formed());
        assert_eq!(pg.jumps.len(), 2);
        let h = 1.0 / n as f64;
        for (jump, at) in pg.jumps.iter().zip([0.25, 0.75]) {
            assert!((jump.theta + 0.3 * h - at).abs() < h, "{jump:?}");
            assert!((jump.top - jump.bottom - 2.0 * std::f64::consts::PI).abs() < 0.1, "{jump:?}");
        }
        let (lo, hi) = pg.fiber_at(pg.jumps[0].theta);
        assert!(lo < -3.0 && hi > 3.0);
    }
}
