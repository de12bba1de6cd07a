use serde::Serialize;

use crate::circle::{golden_min, wrap};
use crate::error::{Error, Result};
use crate::lax_oleinik::{Discretization, WeakKamSolution};
use crate::pseudograph::FullPseudograph;
use crate::twist::{GeneratingFunction, TwistMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrbitSource {
    PseudographBackward,
    Periodic,
    Descent,
}

/// Orbit points `(θ̃_k, r_k)` for `k = -N, ..., 0`; `points[0]` is `k = -N`.
#[derive(Debug, Clone, Serialize)]
pub struct OrbitSegment {
    pub points: Vec<(f64, f64)>,
    pub source: OrbitSource,
}

impl OrbitSegment {
    /// Builds the segment from a lifted configuration, with momenta from `S`.
    pub fn from_configuration(gf: &dyn GeneratingFunction, thetas: Vec<f64>, source: OrbitSource) -> Self {
        let m = thetas.len();
        let points = (0..m)
            .map(|j| {
                let r = if j > 0 {
                    gf.d2(thetas[j - 1], thetas[j])
                } else if m > 1 {
                    -gf.d1(thetas[0], thetas[1])
                } else {
                    f64::NAN
                };
                (thetas[j], r)
            })
            .collect();
        Self { points, source }
    }

    /// Number of backward steps `N`.
    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.0).collect()
    }

    /// `θ̃_k` for `-N <= k <= 0`.
    pub fn theta(&self, k: i64) -> f64 {
        self.points[(self.steps() as i64 + k) as usize].0
    }

    /// Largest `|F(θ̃_k, r_k) - (θ̃_{k+1}, r_{k+1})|` along the segment.
    pub fn orbit_defect(&self, map: &TwistMap) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for w in self.points.windows(2) {
            let (x, r) = map.map_forward(w[0].0, w[0].1)?;
            worst = worst.max((x - w[1].0).abs()).max((r - w[1].1).abs());
        }
        Ok(worst)
    }

    /// Largest distance in `p` from an orbit point to the fiber of `pg` above it.
    pub fn pseudograph_drift(&self, pg: &FullPseudograph) -> f64 {
        self.points
            .iter()
            .map(|&(x, r)| pg.position(wrap(x), r).abs())
            .fold(0.0, f64::max)
    }
}

/// Newton on the discrete Euler-Lagrange equations with both endpoints fixed.
/// Returns the final residual.
pub fn polish_euler_lagrange(gf: &dyn GeneratingFunction, thetas: &mut [f64], tol: f64) -> f64 {
    let m = thetas.len();
    if m < 3 {
        return 0.0;
    }
    let inner = m - 2;
    let residual = |t: &[f64]| -> Vec<f64> {
        (1..m - 1).map(|k| gf.d2(t[k - 1], t[k]) + gf.d1(t[k], t[k + 1])).collect()
    };
    let mut e = residual(thetas);
    let norm = |v: &[f64]| v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    for _ in 0..30 {
        if norm(&e) < tol {
            break;
        }
        // tridiagonal Jacobian, Thomas algorithm
        let mut lower = vec![0.0; inner];
        let mut diag = vec![0.0; inner];
        let mut upper = vec![0.0; inner];
        for j in 0..inner {
            let k = j + 1;
            lower[j] = gf.d12(thetas[k - 1], thetas[k]);
            diag[j] = gf.d22(thetas[k - 1], thetas[k]) + gf.d11(thetas[k], thetas[k + 1]);
            upper[j] = gf.d12(thetas[k], thetas[k + 1]);
        }
        let mut rhs: Vec<f64> = e.iter().map(|x| -x).collect();
        for j in 1..inner {
            let w = lower[j] / diag[j - 1];
            diag[j] -= w * upper[j - 1];
            rhs[j] -= w * rhs[j - 1];
        }
        let mut step = vec![0.0; inner];
        step[inner - 1] = rhs[inner - 1] / diag[inner - 1];
        for j in (0..inner - 1).rev() {
            step[j] = (rhs[j] - upper[j] * step[j + 1]) / diag[j];
        }
        let before = norm(&e);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = (0..m)
                .map(|k| if k == 0 || k == m - 1 { thetas[k] } else { thetas[k] + lambda * step[k - 1] })
                .collect();
            let e_trial = residual(&trial);
            if norm(&e_trial) < before || lambda < 1e-4 {
                thetas.copy_from_slice(&trial);
                e = e_trial;
                break;
            }
            lambda *= 0.5;
        }
    }
    norm(&e)
}

/// The calibrated backward orbit of `sol` through `theta0`.
///
/// Predecessors are chosen by minimizing `ũ(θ̃') + S(θ̃', θ̃) + c(θ̃' - θ̃)`
/// step by step. The resulting chain is then made an exact orbit by Newton on
/// the Euler-Lagrange equations with the end points held fixed.
pub fn backward_orbit(
    disc: &Discretization,
    sol: &WeakKamSolution,
    theta0: f64,
    steps: usize,
) -> Result<OrbitSegment> {
    if sol.n() != disc.grid.n {
        return Err(Error::InvalidInput("solution and discretization grids differ".into()));
    }
    let op = disc.operator(sol.c)?;
    let mut chain = vec![wrap(theta0)];
    for _ in 0..steps {
        let last = chain[chain.len() - 1];
        let (prev, _) = op.argmin_at(&sol.u, last);
        chain.push(prev);
    }
    chain.reverse();
    let gf = disc.generating();
    polish_euler_lagrange(gf, &mut chain, 1e-13);
    Ok(OrbitSegment::from_configuration(gf, chain, OrbitSource::PseudographBackward))
}

/// Backward orbit from explicit data by iterating `F⁻¹`.
pub fn backward_orbit_from(map: &TwistMap, theta0: f64, r0: f64, steps: usize) -> Result<OrbitSegment> {
    let mut pts = vec![(theta0, r0)];
    for _ in 0..steps {
        let (x, r) = pts[pts.len() - 1];
        pts.push(map.map_inverse(x, r)?);
    }
    pts.reverse();
    Ok(OrbitSegment {
        points: pts,
        source: OrbitSource::PseudographBackward,
    })
}

/// `ũ(θ̃_0) - ũ(θ̃_k) - Σ S(θ̃_i, θ̃_{i+1}) - c(θ̃_k - θ̃_0) - |k|α` for
/// `k = -1, ..., -N` (in that order).
pub fn calibration_residual(gf: &dyn GeneratingFunction, sol: &WeakKamSolution, seg: &OrbitSegment) -> Vec<f64> {
    let n = seg.steps();
    let t0 = seg.theta(0);
    let u0 = sol.value(wrap(t0));
    let mut action = 0.0;
    (1..=n as i64)
        .map(|m| {
            let k = -m;
            action += gf.eval(seg.theta(k), seg.theta(k + 1));
            u0 - sol.value(wrap(seg.theta(k))) - action - sol.c * (seg.theta(k) - t0) - m as f64 * sol.alpha
        })
        .collect()
}

/// Interpolation error scale used for calibration checks: `K h² + residual`.
pub fn grid_tol(sol: &WeakKamSolution) -> f64 {
    let h = sol.grid.h();
    sol.semiconcavity_k.max(1.0) * h * h + sol.residual
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RotationEstimate {
    /// `(θ̃_{-N} - θ̃_0) / (-N)`.
    pub estimate: f64,
    /// Slope minimizing `sup_k |θ̃_k - θ̃_0 - kρ|`.
    pub best_rho: f64,
    /// That minimal sup.
    pub bound: f64,
}

impl RotationEstimate {
    pub fn passed(&self, slack: f64) -> bool {
        self.bound < 1.0 + slack
    }
}

pub fn rotation_number_of_segment(seg: &OrbitSegment) -> Result<RotationEstimate> {
    let n = seg.steps();
    if n < 20 {
        return Err(Error::InvalidInput(format!("segment of {n} steps is too short")));
    }
    let t0 = seg.theta(0);
    let estimate = (seg.theta(-(n as i64)) - t0) / -(n as f64);
    let sup = |rho: f64| {
        (1..=n as i64)
            .map(|m| (seg.theta(-m) - t0 + m as f64 * rho).abs())
            .fold(0.0, f64::max)
    };
    let slopes = (1..=n as i64).map(|m| (seg.theta(-m) - t0) / -(m as f64));
    let (lo, hi) = slopes.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s), b.max(s)));
    let (best_rho, bound) = if hi > lo { golden_min(sup, lo, hi, 100) } else { (lo, sup(lo)) };
    let (best_rho, bound) = if sup(estimate) < bound { (estimate, sup(estimate)) } else { (best_rho, bound) };
    Ok(RotationEstimate {
        estimate,
        best_rho,
        bound,
    })
}

/// Coincidences (runs collapsed) plus strict sign changes of `a_k - b_k`.
pub fn crossing_count(a: &[f64], b: &[f64], tol: f64) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput("sequences of different length".into()));
    }
    let mut count = 0;
    let mut last_sign = 0.0;
    let mut in_touch = false;
    let mut touched_since = false;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        if d.abs() <= tol {
            if !in_touch {
                count += 1;
                in_touch = true;
            }
            touched_since = true;
            continue;
        }
        in_touch = false;
        let s = d.signum();
        if last_sign != 0.0 && s != last_sign && !touched_since {
            count += 1;
        }
        last_sign = s;
        touched_since = false;
    }
    Ok(count)
}
