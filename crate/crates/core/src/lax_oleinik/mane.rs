use serde::Serialize;

use super::operator::{projected_cost_with_shift, Discretization};
use super::solve::{SolveOptions, WeakKamSolution};
use crate::circle::{interp_periodic, wrap};
use crate::error::{Error, Result};

/// Rows `θ' ↦ 𝒮ᶜ(θ_s, θ')` of the Mañé potential from a set of source points.
#[derive(Debug, Clone, Serialize)]
pub struct ManePotential {
    pub c: f64,
    pub alpha: f64,
    pub sources: Vec<f64>,
    /// `𝒮ᶜₙ(θ_s, ·)` for `n = 1..=steps`, per source.
    pub finite: Vec<Vec<Vec<f64>>>,
    /// Running minimum of `𝒮ᶜₙ + nα`, per source.
    pub mane: Vec<Vec<f64>>,
    pub n_max: usize,
    /// Whether every row stopped improving before `n_max`.
    pub stabilized: bool,
}

impl ManePotential {
    /// `𝒮ᶜ(source, θ)` by linear interpolation between nodes.
    pub fn value(&self, source: usize, theta: f64) -> f64 {
        interp_periodic(&self.mane[source], theta)
    }
}

/// Horizon cap and patience used when no explicit `n_max` is requested.
pub fn default_horizon(n: usize, q: Option<u64>) -> (usize, usize) {
    let patience = 20usize.max(4 * q.unwrap_or(1) as usize);
    (4 * n, patience)
}

impl Discretization {
    /// One-step projected costs from an arbitrary circle point to every node.
    fn first_row(&self, c: f64, source: f64) -> Result<Vec<f64>> {
        let gf = self.generating();
        self.grid
            .nodes()
            .into_iter()
            .map(|x| projected_cost_with_shift(gf, c, source, x).map(|(v, _)| v))
            .collect()
    }

    /// Mañé potential rows from `sources`. Rows are composed with the grid
    /// operator until no entry of the running minimum improves by more than
    /// `1e-13` during `patience` consecutive steps, or `n_max` steps.
    pub fn mane_potential(
        &self,
        c: f64,
        alpha: f64,
        sources: &[f64],
        n_max: usize,
        patience: usize,
    ) -> Result<ManePotential> {
        let rows = self.rows(c, None)?;
        let n = self.grid.n;
        let mut finite = Vec::with_capacity(sources.len());
        let mut manes = Vec::with_capacity(sources.len());
        let mut stabilized = true;
        for &s in sources {
            let mut v = self.first_row(c, wrap(s))?;
            let mut mane: Vec<f64> = v.iter().map(|x| x + alpha).collect();
            let mut history = vec![v.clone()];
            let mut quiet = 0;
            let mut next = vec![0.0; n];
            let mut step = 1;
            while step < n_max && quiet < patience {
                rows.apply(&v, &mut next, None);
                std::mem::swap(&mut v, &mut next);
                step += 1;
                let mut improved = false;
                for (m, x) in mane.iter_mut().zip(&v) {
                    let cand = x + step as f64 * alpha;
                    if cand < *m - 1e-13 {
                        improved = true;
                    }
                    if cand < *m {
                        *m = cand;
                    }
                }
                quiet = if improved { 0 } else { quiet + 1 };
                history.push(v.clone());
            }
            stabilized &= quiet >= patience;
            finite.push(history);
            manes.push(mane);
        }
        Ok(ManePotential {
            c,
            alpha,
            sources: sources.to_vec(),
            finite,
            mane: manes,
            n_max,
            stabilized,
        })
    }

    /// The unique weak KAM solution agreeing with `values` on the Mather set
    /// `points`: `U(x) = min_θ u(θ) + 𝒮ᶜ(θ, x)`.
    ///
    /// When the points cover every node the Mather set is the whole circle and
    /// the data is returned after a one-step domination check.
    pub fn extend_from_mather(
        &self,
        c: f64,
        alpha: f64,
        points: &[f64],
        values: &[f64],
        tol: f64,
    ) -> Result<WeakKamSolution> {
        if points.len() != values.len() || points.is_empty() {
            return Err(Error::InvalidInput(
                "Mather points and values must be non-empty and of equal length".into(),
            ));
        }
        let n = self.grid.n;
        if points.len() >= n {
            let u: Vec<f64> = (0..n)
                .map(|i| {
                    let target = self.grid.node(i);
                    let j = points
                        .iter()
                        .position(|&p| crate::circle::circle_dist(p, target) < 0.25 * self.grid.h())
                        .ok_or_else(|| Error::InvalidInput("Mather set misses a grid node".into()))?;
                    Ok(values[j])
                })
                .collect::<Result<_>>()?;
            let mut op = self.operator(c)?;
            let tu = op.apply_grid(&u)?;
            for i in 0..n {
                let defect = u[i] - tu[i] - alpha;
                if defect > tol {
                    return Err(Error::NotDominated {
                        defect,
                        from: f64::NAN,
                        to: self.grid.node(i),
                    });
                }
            }
            return self.polish(c, u);
        }
        let (n_max, patience) = default_horizon(n, None);
        let mane = self.mane_potential(c, alpha, points, n_max, patience)?;
        for (a, &pa) in points.iter().enumerate() {
            for (b, &pb) in points.iter().enumerate() {
                let defect = values[b] - values[a] - mane.value(a, pb);
                if defect > tol {
                    return Err(Error::NotDominated {
                        defect,
                        from: pa,
                        to: pb,
                    });
                }
            }
        }
        let u: Vec<f64> = (0..n)
            .map(|i| {
                (0..points.len())
                    .map(|a| values[a] + mane.mane[a][i])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        self.polish(c, u)
    }

    /// Settles grid-level data onto a fixed point of the refined operator by
    /// warm-started iteration.
    fn polish(&self, c: f64, u: Vec<f64>) -> Result<WeakKamSolution> {
        let mut op = self.operator(c)?;
        super::solve::solve_refined_from(&mut op, &u, &SolveOptions::default())
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::lax_oleinik::CircleGrid;
    use crate::twist::catalog::{Integrable, Pendulum};

    fn pendulum(n: usize) -> Discretization {
        Discretization::new(Arc::new(Pendulum::new(0.1, 1)), CircleGrid::new(n).unwrap())
    }

    #[test]
    fn mane_vanishes_on_the_diagonal_of_mather_points() {
        let disc = pendulum(128);
        let mane = disc.mane_potential(0.0, 0.1, &[0.0, 0.5, 0.3], 512, 20).unwrap();
        assert!(mane.stabilized);
        assert!(mane.value(0, 0.0).abs() < 1e-9);
        assert!(mane.value(1, 0.5).abs() < 1e-9);
        assert!(mane.value(2, 0.3) > 1e-3);
    }

    #[test]
    fn extension_reproduces_the_solution() {
        let disc = pendulum(256);
        let sol = disc.solve(0.0, &SolveOptions::grid_only()).unwrap();
        let ext = disc
            .extend_from_mather(0.0, sol.alpha, &[0.0, 0.5], &[sol.u[0], sol.u[128]], 1e-6)
            .unwrap();
        let h = disc.grid.h();
        let err = ext.u.iter().zip(&sol.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 2.0 * h * 2.0, "{err}");
        assert!((ext.alpha - sol.alpha).abs() < 1e-8);
        assert!(ext.residual < 1e-8, "{}", ext.residual);
    }

    #[test]
    fn undominated_data_is_rejected() {
        let disc = pendulum(128);
        let err = disc.extend_from_mather(0.0, 0.1, &[0.0, 0.5], &[0.0, 5.0], 1e-6);
        assert!(matches!(err, Err(Error::NotDominated { .. })));
    }

    #[test]
    fn full_circle_extension_is_identity() {
        let disc = Discretization::new(Arc::new(Integrable), CircleGrid::new(64).unwrap());
        let pts = disc.grid.nodes();
        let vals = vec![0.0; 64];
        let sol = disc.extend_from_mather(0.7, 0.245, &pts, &vals, 1e-9).unwrap();
        assert!(sol.u.iter().all(|v| *v == 0.0));
    }
}
