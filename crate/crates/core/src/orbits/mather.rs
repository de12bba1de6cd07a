use serde::Serialize;

use super::segment::{OrbitSegment, OrbitSource};
use crate::alpha_rho::{beta_oracle, BetaResult, PeriodicMinimizer};
use crate::error::{Error, Result};
use crate::twist::GeneratingFunction;

/// All local minimizers found for the rotation `p/q`; the global ones are
/// Mather orbits.
pub fn periodic_minimizer(gf: &dyn GeneratingFunction, p: i64, q: u64, restarts: usize, seed: u64) -> Result<BetaResult> {
    beta_oracle(gf, p, q, restarts, seed)
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Anchor {
    /// Circle point in `[0, 1)`.
    x: f64,
    orbit: usize,
    /// Index `k` with `lift(k) = x + shift`.
    k: i64,
    shift: f64,
}

/// The Mather set of a rational rotation number, as the union of the global
/// periodic minimizers.
#[derive(Debug, Clone, Serialize)]
pub struct MatherSet {
    pub p: i64,
    pub q: u64,
    pub orbits: Vec<PeriodicMinimizer>,
    /// Circle points with their fiber values, sorted by `θ`.
    pub points: Vec<(f64, f64)>,
    anchors: Vec<Anchor>,
}

pub fn mather_set(gf: &dyn GeneratingFunction, p: i64, q: u64, restarts: usize, seed: u64) -> Result<MatherSet> {
    let beta = periodic_minimizer(gf, p, q, restarts, seed)?;
    let orbits: Vec<PeriodicMinimizer> = beta.global_minimizers().cloned().collect();
    if orbits.is_empty() {
        return Err(Error::Optimizer(format!("no global minimizer for {p}/{q}")));
    }
    let mut anchors = Vec::new();
    let mut points = Vec::new();
    for (m, orbit) in orbits.iter().enumerate() {
        for k in 0..q as i64 {
            let y = orbit.lift(k);
            let shift = y.floor();
            anchors.push(Anchor {
                x: y - shift,
                orbit: m,
                k,
                shift,
            });
            points.push((y - shift, gf.d2(orbit.lift(k - 1), y)));
        }
    }
    anchors.sort_by(|a, b| a.x.total_cmp(&b.x));
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(MatherSet {
        p: beta.p,
        q: beta.q,
        orbits,
        points,
        anchors,
    })
}

impl MatherSet {
    pub fn rotation(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// The anchor of `y⁺(x)` and the integer offset of its lift.
    fn above(&self, x: f64) -> (Anchor, f64) {
        let base = x.floor();
        let frac = x - base;
        let j = self.anchors.partition_point(|a| a.x < frac);
        match self.anchors.get(j) {
            Some(a) => (*a, base),
            None => (self.anchors[0], base + 1.0),
        }
    }

    fn below(&self, x: f64) -> (Anchor, f64) {
        let base = x.floor();
        let frac = x - base;
        let j = self.anchors.partition_point(|a| a.x <= frac);
        if j == 0 {
            (self.anchors[self.anchors.len() - 1], base - 1.0)
        } else {
            (self.anchors[j - 1], base)
        }
    }

    fn iterate(&self, (a, base): (Anchor, f64), n: i64) -> f64 {
        self.orbits[a.orbit].lift(a.k + n) - a.shift + base
    }

    /// `y⁺(x) = min{y ∈ M̃ : y >= x}` on lifts.
    pub fn y_plus(&self, x: f64) -> f64 {
        self.iterate(self.above(x), 0)
    }

    /// `y⁻(x) = max{y ∈ M̃ : y <= x}` on lifts.
    pub fn y_minus(&self, x: f64) -> f64 {
        self.iterate(self.below(x), 0)
    }

    /// The `n`-th iterate of `y⁺(x)` along its orbit (`n < 0` goes backward).
    pub fn y_plus_n(&self, x: f64, n: i64) -> f64 {
        self.iterate(self.above(x), n)
    }

    pub fn y_minus_n(&self, x: f64, n: i64) -> f64 {
        self.iterate(self.below(x), n)
    }

    /// Largest violation of `y⁻ⁿ(θ̃_0) <= θ̃_n <= y⁺ⁿ(θ̃_0)` along the segment.
    pub fn squeeze_defect(&self, seg: &OrbitSegment) -> f64 {
        let t0 = seg.theta(0);
        let (hi, lo) = (self.above(t0), self.below(t0));
        (0..=seg.steps() as i64)
            .map(|m| {
                let k = -m;
                let t = seg.theta(k);
                (self.iterate(lo, k) - t).max(t - self.iterate(hi, k)).max(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// The Mather orbit through the `i`-th global minimizer as a segment of `steps` steps.
    pub fn orbit_segment(&self, gf: &dyn GeneratingFunction, i: usize, steps: usize) -> OrbitSegment {
        let thetas = (-(steps as i64)..=0).map(|k| self.orbits[i].lift(k)).collect();
        OrbitSegment::from_configuration(gf, thetas, OrbitSource::Periodic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twist::catalog::{Integrable, Pendulum};

    #[test]
    fn pendulum_fixed_points() {
        let m = mather_set(&Pendulum::new(0.1, 1), 0, 1, 8, 0).unwrap();
        assert_eq!(m.points.len(), 2);
        assert!(m.points[0].0.abs() < 1e-9 && (m.points[1].0 - 0.5).abs() < 1e-9);
        assert!(m.points.iter().all(|p| p.1.abs() < 1e-9));
        assert!((m.y_plus(0.3) - 0.5).abs() < 1e-9);
        assert!(m.y_minus(0.3).abs() < 1e-9);
        assert!((m.y_plus(-0.7) + 0.5).abs() < 1e-9);
        assert!((m.y_minus_n(2.3, -5) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn integrable_rotation_orbit_iterates() {
        let m = mather_set(&Integrable, 1, 3, 4, 1).unwrap();
        let y = m.y_plus(0.0);
        assert!((m.y_plus_n(0.0, 3) - (y + 1.0)).abs() < 1e-9);
        assert!((m.y_plus_n(0.0, -1) - (y - 1.0 / 3.0)).abs() < 1e-9);
    }
}
