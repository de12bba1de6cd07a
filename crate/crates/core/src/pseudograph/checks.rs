use serde::Serialize;

use super::build::{build_pseudograph, FullPseudograph};
use super::hausdorff::point_to_polyline;
use crate::circle::{interp_periodic, wrap};
use crate::error::{Error, Result};
use crate::lax_oleinik::{CircleGrid, Discretization, SolveOptions};
use crate::twist::{AnalyticTruth, MapCatalogEntry, TwistMap};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrderReport {
    /// `min_θ (min fiber of B - max fiber of A)` over the nodes.
    pub margin: f64,
    pub worst_theta: f64,
}

impl OrderReport {
    pub fn passed(&self) -> bool {
        self.margin > 0.0
    }
}

/// Checks that `a` lies strictly below `b` at every node of `a`'s grid.
pub fn vertical_order_check(a: &FullPseudograph, b: &FullPseudograph) -> OrderReport {
    a.intervals
        .iter()
        .map(|iv| {
            let (_, top_a) = a.fiber_at(iv.theta);
            let (bottom_b, _) = b.fiber_at(iv.theta);
            OrderReport {
                margin: bottom_b - top_a,
                worst_theta: iv.theta,
            }
        })
        .min_by(|x, y| x.margin.total_cmp(&y.margin))
        .expect("non-empty grid")
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoveringResult {
    pub c: f64,
    /// Flat-metric distance from the point to `PG(c)`.
    pub distance: f64,
    pub probes: usize,
}

/// Finds `c` with `(theta, r)` within `tol` of `PG(c)` by bisection on the side
/// of `PG(c)` the point lies on. The bracket is widened geometrically when it
/// does not straddle the point.
pub fn covering_locate(
    mut pseudograph: impl FnMut(f64) -> Result<FullPseudograph>,
    theta: f64,
    r: f64,
    bracket: (f64, f64),
    tol: f64,
) -> Result<CoveringResult> {
    let (mut lo, mut hi) = bracket;
    let mut probes = 0;
    let mut probe = |c: f64, probes: &mut usize| -> Result<(f64, f64)> {
        *probes += 1;
        let pg = pseudograph(c)?;
        Ok((pg.position(theta, r), pg.distance_to(theta, r)))
    };
    let (mut p_lo, d_lo) = probe(lo, &mut probes)?;
    let (mut p_hi, d_hi) = probe(hi, &mut probes)?;
    let mut best = if d_lo < d_hi { (lo, d_lo) } else { (hi, d_hi) };
    let mut widen = 0;
    while (p_lo < 0.0 || p_hi > 0.0) && widen < 12 {
        let w = hi - lo;
        if p_lo < 0.0 {
            hi = lo;
            p_hi = p_lo;
            lo -= w;
            let (p, d) = probe(lo, &mut probes)?;
            p_lo = p;
            if d < best.1 {
                best = (lo, d);
            }
        } else {
            lo = hi;
            p_lo = p_hi;
            hi += w;
            let (p, d) = probe(hi, &mut probes)?;
            p_hi = p;
            if d < best.1 {
                best = (hi, d);
            }
        }
        widen += 1;
    }
    if p_lo < 0.0 || p_hi > 0.0 {
        return Err(Error::NonBracketing(format!(
            "({theta}, {r}) not between PG({lo}) and PG({hi})"
        )));
    }
    while best.1 > tol && hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        let (p, d) = probe(mid, &mut probes)?;
        if d < best.1 {
            best = (mid, d);
        }
        if p > 0.0 {
            lo = mid;
        } else if p < 0.0 {
            hi = mid;
        } else {
            break;
        }
    }
    Ok(CoveringResult {
        c: best.0,
        distance: best.1,
        probes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PullbackReport {
    pub samples: usize,
    /// Smallest increment of the pulled-back `θ` along the curve.
    pub min_increment: f64,
    /// Sample index where the increment is smallest.
    pub worst_sample: usize,
    /// Total `θ` advance of the pulled-back curve (1 for a graph over the circle).
    pub advance: f64,
    /// Largest distance from a pulled-back point to the original polyline.
    pub invariance_defect: f64,
    /// Largest `h / |∂₁₂S|`: how far one grid step of momentum error moves a
    /// pulled-back point.
    pub resolution: f64,
}

impl PullbackReport {
    /// Single-valued over the circle up to backtracking below `resolution`.
    pub fn is_graph(&self) -> bool {
        self.min_increment > -self.resolution && (self.advance - 1.0).abs() < 1e-6
    }
}

/// Applies `F⁻¹` to a dense sample of the polyline and checks that the
/// resulting `θ` values increase along the curve.
pub fn pullback_graph_check(map: &TwistMap, pg: &FullPseudograph) -> Result<PullbackReport> {
    let step = 0.5 / pg.n() as f64;
    let mut pts = Vec::new();
    for w in pg.polyline.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b.0 - a.0).hypot(b.1 - a.1);
        let k = (len / step).ceil().max(1.0) as usize;
        pts.extend((0..k).map(|j| {
            let t = j as f64 / k as f64;
            (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
        }));
    }
    pts.push(pg.polyline[pg.polyline.len() - 1]);
    let pulled = pts
        .iter()
        .map(|&(x, p)| map.map_inverse(x, p))
        .collect::<Result<Vec<_>>>()?;
    let mut min_increment = f64::INFINITY;
    let mut worst_sample = 0;
    for (j, w) in pulled.windows(2).enumerate() {
        let d = w[1].0 - w[0].0;
        if d < min_increment {
            min_increment = d;
            worst_sample = j;
        }
    }
    let advance = pulled[pulled.len() - 1].0 - pulled[0].0;
    let h = 1.0 / pg.n() as f64;
    let gf = map.generating();
    let resolution = pulled
        .iter()
        .zip(&pts)
        .map(|(&(x, _), &(big, _))| h / gf.d12(x, big).abs())
        .fold(0.0, f64::max);
    let invariance_defect = pulled
        .iter()
        .map(|&(x, p)| point_to_polyline((x - (x - pg.polyline[0].0).floor(), p), &pg.polyline, f64::INFINITY))
        .fold(0.0, f64::max);
    Ok(PullbackReport {
        samples: pulled.len(),
        min_increment,
        worst_sample,
        advance,
        invariance_defect,
        resolution,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct C1Report {
    pub is_c1: bool,
    pub max_gap: f64,
    pub at: f64,
}

/// Whether every subdifferential interval is at most `gap_tol` wide.
pub fn is_c1(pg: &FullPseudograph, gap_tol: f64) -> C1Report {
    let (max_gap, at) = pg
        .intervals
        .iter()
        .map(|iv| (iv.width(), iv.theta))
        .fold((f64::NEG_INFINITY, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc });
    C1Report {
        is_c1: max_gap <= gap_tol,
        max_gap,
        at,
    }
}

/// Largest distance from a thin node of `pg` to the union of `others`.
pub fn inclusion_defect(pg: &FullPseudograph, others: &[&FullPseudograph]) -> f64 {
    pg.thin_nodes()
        .map(|iv| {
            let p = (iv.theta, 0.5 * (iv.p_minus + iv.p_plus));
            others
                .iter()
                .map(|o| {
                    let x = p.0 - (p.0 - o.polyline[0].0).floor();
                    point_to_polyline((x, p.1), &o.polyline, f64::INFINITY)
                })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Nodes where the fibers of `a` and `b` come within `tol` of each other.
pub fn coincidence_locus(a: &FullPseudograph, b: &FullPseudograph, tol: f64) -> Vec<f64> {
    a.intervals
        .iter()
        .filter(|iv| {
            let (lo_a, hi_a) = a.fiber_at(iv.theta);
            let (lo_b, hi_b) = b.fiber_at(iv.theta);
            let gap = (lo_b - hi_a).max(lo_a - hi_b).max(0.0);
            gap <= tol
        })
        .map(|iv| iv.theta)
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SemiconjugacyReport {
    pub c: f64,
    pub rho: f64,
    pub defect: f64,
    pub at: f64,
}

/// `sup |h_c∘g_c - h_c - ρ(c)|` with `h_c = id + ∂u/∂c` by central differences
/// and `g_c(θ) = π₁F(θ, c + u'_c(θ))`. Only for integrable catalog entries.
pub fn semiconjugacy_check(
    entry: &MapCatalogEntry,
    c: f64,
    dc: f64,
    grid: CircleGrid,
) -> Result<SemiconjugacyReport> {
    match entry.analytic_truth {
        Some(AnalyticTruth::Integrable | AnalyticTruth::Conjugated(_)) => {}
        _ => {
            return Err(Error::Unsupported(format!(
                "semi-conjugacy check needs an integrable map, got {}",
                entry.name
            )))
        }
    }
    let disc = Discretization::new(entry.map.generating_arc(), grid);
    disc.prepare(c - dc - 1.0, c + dc + 1.0)?;
    let opts = SolveOptions::default();
    let (lo, mid, hi) = (disc.solve(c - dc, &opts)?, disc.solve(c, &opts)?, disc.solve(c + dc, &opts)?);
    let rho = (hi.alpha - lo.alpha) / (2.0 * dc);
    let du: Vec<f64> = hi.u.iter().zip(&lo.u).map(|(a, b)| (a - b) / (2.0 * dc)).collect();
    let conj = |x: f64| x + interp_periodic(&du, wrap(x));
    let pg = build_pseudograph(&mid, super::build::default_gap_tol(&mid));
    let mut worst = (0.0, 0.0);
    for (i, iv) in pg.intervals.iter().enumerate() {
        if !pg.smooth[i] {
            continue;
        }
        let theta = grid.node(i);
        let (image, _) = entry.map.map_forward(theta, 0.5 * (iv.p_minus + iv.p_plus))?;
        let d = (conj(image) - conj(theta) - rho).abs();
        if d > worst.0 {
            worst = (d, theta);
        }
    }
    Ok(SemiconjugacyReport {
        c,
        rho,
        defect: worst.0,
        at: worst.1,
    })
}
