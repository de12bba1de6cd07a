//! Minimal average action `A(p/q)` over `(p, q)`-periodic configurations.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circle::{circle_dist, golden_min, wrap};
use crate::error::{Error, Result};
use crate::twist::GeneratingFunction;

/// A `(p, q)`-periodic configuration `θ̃_0, ..., θ̃_{q-1}` with
/// `θ̃_{i+q} = θ̃_i + p`.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicMinimizer {
    pub p: i64,
    pub q: u64,
    pub config: Vec<f64>,
    pub average_action: f64,
    pub gradient_norm: f64,
    pub min_eigenvalue: f64,
    /// Realizes the best average action found.
    pub global: bool,
}

impl PeriodicMinimizer {
    /// Points of the orbit reduced to the circle, sorted.
    pub fn circle_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.config.iter().map(|&x| wrap(x)).collect();
        pts.sort_by(f64::total_cmp);
        pts
    }

    /// Lift `θ̃_k` for any integer `k`.
    pub fn lift(&self, k: i64) -> f64 {
        let q = self.q as i64;
        let (shift, idx) = (k.div_euclid(q), k.rem_euclid(q));
        self.config[idx as usize] + (shift * self.p) as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaResult {
    pub p: i64,
    pub q: u64,
    /// `A(p/q)`, the minimal average action per step.
    pub value: f64,
    /// Distinct local minimizers found, up to translation; global ones flagged.
    pub minimizers: Vec<PeriodicMinimizer>,
    pub failed_restarts: usize,
}

impl BetaResult {
    pub fn global_minimizers(&self) -> impl Iterator<Item = &PeriodicMinimizer> {
        self.minimizers.iter().filter(|m| m.global)
    }

    /// Union of the circle points of all global minimizers, sorted.
    pub fn mather_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.global_minimizers().flat_map(|m| m.circle_points()).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| circle_dist(*a, *b) < 1e-9);
        pts
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Reduces `p/q` to lowest terms.
pub fn normalize(p: i64, q: u64) -> Result<(i64, u64)> {
    if q == 0 {
        return Err(Error::InvalidParameter {
            key: "q".into(),
            reason: "must be at least 1".into(),
        });
    }
    let g = gcd(p.unsigned_abs(), q).max(1);
    Ok((p / g as i64, q / g))
}

struct Periodic<'a> {
    gf: &'a dyn GeneratingFunction,
    p: f64,
    q: usize,
}

impl Periodic<'_> {
    fn at(&self, z: &[f64], i: i64) -> f64 {
        let q = self.q as i64;
        z[i.rem_euclid(q) as usize] + i.div_euclid(q) as f64 * self.p
    }

    fn action(&self, z: &[f64]) -> f64 {
        (0..self.q as i64)
            .map(|i| self.gf.eval(self.at(z, i), self.at(z, i + 1)))
            .sum()
    }

    fn gradient(&self, z: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.q,
            (0..self.q as i64).map(|i| {
                let (a, b, c) = (self.at(z, i - 1), self.at(z, i), self.at(z, i + 1));
                self.gf.d2(a, b) + self.gf.d1(b, c)
            }),
        )
    }

    fn hessian(&self, z: &[f64]) -> DMatrix<f64> {
        let q = self.q;
        let mut h = DMatrix::zeros(q, q);
        for i in 0..q as i64 {
            let (a, b) = (self.at(z, i), self.at(z, i + 1));
            let (r, s) = (i as usize, ((i + 1) as usize) % q);
            h[(r, r)] += self.gf.d11(a, b);
            h[(s, s)] += self.gf.d22(a, b);
            let off = self.gf.d12(a, b);
            h[(r, s)] += off;
            h[(s, r)] += off;
        }
        h
    }

    /// Local action along coordinate `i` with the others frozen.
    fn local(&self, z: &[f64], i: usize, x: f64) -> f64 {
        if self.q == 1 {
            return self.gf.eval(x, x + self.p);
        }
        let i = i as i64;
        self.gf.eval(self.at(z, i - 1), x) + self.gf.eval(x, self.at(z, i + 1))
    }

    fn descend(&self, z: &mut [f64], sweeps: usize) {
        let width = 0.5 / self.q as f64;
        for _ in 0..sweeps {
            for i in 0..self.q {
                let x = z[i];
                let (best, val) = golden_min(|t| self.local(z, i, t), x - width, x + width, 40);
                if val < self.local(z, i, x) {
                    z[i] = best;
                }
            }
        }
    }

    /// Levenberg–Marquardt polish of the Euler–Lagrange system.
    fn polish(&self, z: &mut [f64]) -> f64 {
        let mut mu = 1e-8;
        let mut f = self.action(z);
        let mut g = self.gradient(z);
        for _ in 0..100 {
            if g.amax() < 1e-13 {
                break;
            }
            let h = self.hessian(z);
            let shifted = &h + DMatrix::identity(self.q, self.q) * mu;
            let step = match shifted.clone().cholesky() {
                Some(ch) => ch.solve(&g),
                None => {
                    mu = (mu * 10.0).max(1e-6);
                    continue;
                }
            };
            let trial: Vec<f64> = z.iter().zip(step.iter()).map(|(x, s)| x - s).collect();
            let ft = self.action(&trial);
            if ft <= f + 1e-15 * (1.0 + f.abs()) {
                z.copy_from_slice(&trial);
                f = ft;
                g = self.gradient(z);
                mu = (mu * 0.1).max(1e-14);
            } else {
                mu *= 10.0;
                if mu > 1e8 {
                    break;
                }
            }
        }
        g.amax()
    }
}

/// Same orbit up to translation: the two point sets agree on the circle.
fn same_orbit(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| b.iter().any(|y| circle_dist(*x, *y) < tol))
        && b.iter().all(|y| a.iter().any(|x| circle_dist(*x, *y) < tol))
}

/// Multi-start coordinate descent plus Newton on the periodic Euler–Lagrange
/// equations; returns `A(p/q)` and the distinct minimizers found.
pub fn beta_oracle(gf: &dyn GeneratingFunction, p: i64, q: u64, restarts: usize, seed: u64) -> Result<BetaResult> {
    let (p, q) = normalize(p, q)?;
    let sys = Periodic {
        gf,
        p: p as f64,
        q: q as usize,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (p as u64).wrapping_mul(0x9e37_79b9) ^ (q << 32));
    let mut found: Vec<PeriodicMinimizer> = Vec::new();
    let mut failed = 0;
    for r in 0..restarts.max(1) {
        // spread the first starts evenly, then randomize
        let theta0 = if r < restarts.div_ceil(2) {
            (r as f64 + 0.5) / restarts.div_ceil(2) as f64
        } else {
            rng.gen::<f64>()
        };
        let mut z: Vec<f64> = (0..q).map(|i| theta0 + (i as i64 * p) as f64 / q as f64).collect();
        sys.descend(&mut z, 30);
        let gnorm = sys.polish(&mut z);
        let scale = 1.0 + sys.gradient(&z).iter().map(|x| x.abs()).fold(0.0, f64::max);
        if !gnorm.is_finite() || gnorm > 1e-8 * scale {
            failed += 1;
            continue;
        }
        let min_eig = sys
            .hessian(&z)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -1e-7 {
            failed += 1;
            continue;
        }
        // canonical lift: θ̃_0 in [0, 1)
        let shift = z[0].floor();
        z.iter_mut().for_each(|x| *x -= shift);
        let cand = PeriodicMinimizer {
            p,
            q,
            average_action: sys.action(&z) / q as f64,
            config: z,
            gradient_norm: gnorm,
            min_eigenvalue: min_eig,
            global: false,
        };
        let pts = cand.circle_points();
        if !found.iter().any(|m| same_orbit(&m.circle_points(), &pts, 1e-6)) {
            found.push(cand);
        }
    }
    if found.is_empty() {
        return Err(Error::Optimizer(format!("all {restarts} restarts failed for {p}/{q}")));
    }
    let best = found.iter().map(|m| m.average_action).fold(f64::INFINITY, f64::min);
    for m in &mut found {
        m.global = m.average_action <= best + 1e-10 * (1.0 + best.abs());
    }
    found.sort_by(|a, b| a.average_action.total_cmp(&b.average_action).then(a.config[0].total_cmp(&b.config[0])));
    Ok(BetaResult {
        p,
        q,
        value: best,
        minimizers: found,
        failed_restarts: failed,
    })
}

/// All rationals `p/q` in lowest terms with `q <= q_max` and `lo <= p/q <= hi`.
pub fn rationals_in(lo: f64, hi: f64, q_max: u64) -> Vec<(i64, u64)> {
    let mut out = Vec::new();
    for q in 1..=q_max {
        let p_lo = (lo * q as f64).ceil() as i64;
        let p_hi = (hi * q as f64).floor() as i64;
        for p in p_lo..=p_hi {
            if gcd(p.unsigned_abs(), q) == 1 {
                out.push((p, q));
            }
        }
    }
    out.sort_by(|a, b| (a.0 as f64 / a.1 as f64).total_cmp(&(b.0 as f64 / b.1 as f64)));
    out
}

/// `max_{p/q} c p/q - A(p/q)` over a precomputed list of `(p/q, A)`.
pub fn legendre_lower_bound(values: &[(f64, f64)], c: f64) -> f64 {
    values
        .iter()
        .map(|&(rho, a)| c * rho - a)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twist::catalog::{Integrable, Pendulum, Standard};

    #[test]
    fn integrable_values() {
        let r = beta_oracle(&Integrable, 1, 3, 4, 1).unwrap();
        assert!((r.value - 1.0 / 18.0).abs() < 1e-12);
        let r = beta_oracle(&Integrable, 2, 6, 4, 1).unwrap();
        assert_eq!((r.p, r.q), (1, 3));
    }

    #[test]
    fn pendulum_has_two_fixed_minimizers() {
        let r = beta_oracle(&Pendulum::new(0.1, 1), 0, 1, 8, 7).unwrap();
        assert!((r.value + 0.1).abs() < 1e-12);
        let pts = r.mather_points();
        assert_eq!(pts.len(), 2, "{pts:?}");
        assert!(pts[0].abs() < 1e-9 && (pts[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn standard_fixed_point_matches_scan() {
        let k = 0.6;
        let gf = Standard { k };
        let r = beta_oracle(&gf, 0, 1, 8, 3).unwrap();
        let scan = (0..10_000)
            .map(|i| gf.eval(i as f64 / 1e4, i as f64 / 1e4))
            .fold(f64::INFINITY, f64::min);
        assert!((r.value - scan).abs() < 1e-9);
    }

    #[test]
    fn rationals_are_reduced() {
        let r = rationals_in(0.0, 0.5, 4);
        let as_f: Vec<f64> = r.iter().map(|&(p, q)| p as f64 / q as f64).collect();
        assert_eq!(as_f, vec![0.0, 0.25, 1.0 / 3.0, 0.5]);
    }
}
