use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::CircleGrid;
use super::operator::{Discretization, LaxOleinik};
use crate::circle::interp_periodic;
use crate::error::Result;
use crate::twist::GeneratingFunction;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Stop once `max - min` of `T^c u - u` drops below this.
    pub tol: f64,
    /// Iteration cap per phase; `None` means `max(20 n, 10⁴)`.
    pub max_iter: Option<usize>,
    /// Run the golden-section refined phase after the grid phase.
    pub refine: bool,
    /// Weight of the new iterate in `u ← u + λ (T^c u - u - mid)`.
    pub damping: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: None,
            refine: true,
            damping: 0.5,
        }
    }
}

impl SolveOptions {
    pub fn grid_only() -> Self {
        Self {
            refine: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeakKamSolution {
    pub c: f64,
    pub grid: CircleGrid,
    /// `u(θ_i)`, normalized so that `u[0] = 0`.
    pub u: Vec<f64>,
    pub alpha: f64,
    /// `sup |T^c u + α - u|`.
    pub residual: f64,
    /// Largest second difference of `u` divided by `h²`.
    pub semiconcavity_k: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl WeakKamSolution {
    pub fn n(&self) -> usize {
        self.u.len()
    }

    /// `u` at any point of the circle, by linear interpolation.
    pub fn value(&self, theta: f64) -> f64 {
        interp_periodic(&self.u, theta)
    }

    /// Builds a solution record from node values, normalizing `u(0) = 0` and
    /// measuring the semi-concavity constant.
    pub fn from_values(c: f64, grid: CircleGrid, mut u: Vec<f64>, alpha: f64, residual: f64) -> Self {
        let u0 = u[0];
        u.iter_mut().for_each(|x| *x -= u0);
        let semiconcavity_k = semiconcavity_constant(&u);
        Self {
            c,
            grid,
            u,
            alpha,
            residual,
            semiconcavity_k,
            converged: true,
            iterations: 0,
        }
    }

    /// Right and left derivatives of `u` at node `i` by one-sided 3-point stencils.
    pub fn one_sided_derivatives(&self, i: usize) -> (f64, f64) {
        let n = self.n();
        let h = self.grid.h();
        let u = |k: i64| self.u[k.rem_euclid(n as i64) as usize];
        let i = i as i64;
        let right = (-3.0 * u(i) + 4.0 * u(i + 1) - u(i + 2)) / (2.0 * h);
        let left = (3.0 * u(i) - 4.0 * u(i - 1) + u(i - 2)) / (2.0 * h);
        (right, left)
    }
}

/// Largest `(u_{i+1} - 2u_i + u_{i-1}) / h²`, clamped at zero.
pub fn semiconcavity_constant(u: &[f64]) -> f64 {
    let n = u.len();
    let h2 = 1.0 / (n as f64 * n as f64);
    (0..n)
        .map(|i| (u[(i + 1) % n] - 2.0 * u[i] + u[(i + n - 1) % n]) / h2)
        .fold(0.0, f64::max)
}

fn spread(d: &[f64]) -> (f64, f64) {
    d.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

struct Phase {
    u: Vec<f64>,
    alpha: f64,
    gap: f64,
    converged: bool,
    iterations: usize,
}

/// Damped (Krasnoselskii–Mann) iteration of `T^c` normalized by the midpoint
/// of the sandwich `[min, max]` of `T^c u - u`.
fn iterate(
    op: &mut LaxOleinik<'_>,
    mut u: Vec<f64>,
    refined: bool,
    opts: &SolveOptions,
    max_iter: usize,
) -> Result<Phase> {
    let mut recent = std::collections::VecDeque::with_capacity(100);
    let mut it = 0;
    loop {
        let tu = if refined {
            op.apply_refined(&u)?
        } else {
            op.apply_grid(&u)?
        };
        let d: Vec<f64> = tu.iter().zip(&u).map(|(a, b)| a - b).collect();
        let (lo, hi) = spread(&d);
        let mid = 0.5 * (lo + hi);
        if recent.len() == 100 {
            recent.pop_front();
        }
        recent.push_back(-mid);
        let gap = hi - lo;
        if gap < opts.tol || it >= max_iter {
            let converged = gap < opts.tol;
            let alpha = if converged {
                -mid
            } else {
                recent.iter().sum::<f64>() / recent.len() as f64
            };
            return Ok(Phase {
                u,
                alpha,
                gap,
                converged,
                iterations: it,
            });
        }
        let shift = u[0] + opts.damping * (d[0] - mid);
        for (x, di) in u.iter_mut().zip(&d) {
            *x += opts.damping * (di - mid) - shift;
        }
        it += 1;
    }
}

/// Solves `u = T^c u + α(c)` from `init` (zero if `None`).
pub fn solve_with(op: &mut LaxOleinik<'_>, init: Option<&[f64]>, opts: &SolveOptions) -> Result<WeakKamSolution> {
    let grid = *op.grid();
    let max_iter = opts.max_iter.unwrap_or((20 * grid.n).max(10_000));
    let u0 = init.map_or_else(|| vec![0.0; grid.n], |u| u.to_vec());
    let mut phase = iterate(op, u0, false, opts, max_iter)?;
    let mut total = phase.iterations;
    if opts.refine {
        let grid_phase_converged = phase.converged;
        phase = iterate(op, phase.u, true, opts, max_iter)?;
        phase.converged &= grid_phase_converged;
        total += phase.iterations;
    }
    let mut sol = WeakKamSolution::from_values(op.c, grid, phase.u, phase.alpha, 0.5 * phase.gap);
    sol.converged = phase.converged;
    sol.iterations = total;
    Ok(sol)
}

/// Iterates the refined operator only, from `init`. Started from a subsolution
/// of `T^c + α` the iterates increase to the least fixed point above it.
pub fn solve_refined_from(op: &mut LaxOleinik<'_>, init: &[f64], opts: &SolveOptions) -> Result<WeakKamSolution> {
    let grid = *op.grid();
    let max_iter = opts.max_iter.unwrap_or((20 * grid.n).max(10_000));
    let phase = iterate(op, init.to_vec(), true, opts, max_iter)?;
    let mut sol = WeakKamSolution::from_values(op.c, grid, phase.u, phase.alpha, 0.5 * phase.gap);
    sol.converged = phase.converged;
    sol.iterations = phase.iterations;
    Ok(sol)
}

/// Weak KAM solution at `c` on `grid`.
pub fn solve_weak_kam(
    gf: Arc<dyn GeneratingFunction>,
    c: f64,
    grid: CircleGrid,
    tol: f64,
    max_iter: usize,
) -> Result<WeakKamSolution> {
    let disc = Discretization::new(gf, grid);
    let mut op = disc.operator(c)?;
    let opts = SolveOptions {
        tol,
        max_iter: Some(max_iter),
        ..SolveOptions::default()
    };
    solve_with(&mut op, None, &opts)
}

impl Discretization {
    pub fn solve(&self, c: f64, opts: &SolveOptions) -> Result<WeakKamSolution> {
        let mut op = self.operator(c)?;
        solve_with(&mut op, None, opts)
    }

    /// Fixed-point defect `sup |T^c u + α - u|` of a solution under the
    /// refined operator.
    pub fn residual(&self, sol: &WeakKamSolution) -> Result<f64> {
        let mut op = self.operator(sol.c)?;
        let tu = op.apply_refined(&sol.u)?;
        Ok(tu
            .iter()
            .zip(&sol.u)
            .map(|(t, u)| (t + sol.alpha - u).abs())
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twist::catalog::{Integrable, Pendulum};

    #[test]
    fn integrable_alpha_is_half_c_squared() {
        let disc = Discretization::new(Arc::new(Integrable), CircleGrid::new(128).unwrap());
        for c in [-1.3, 0.0, 0.4, 1.0] {
            let sol = disc.solve(c, &SolveOptions::default()).unwrap();
            assert!(sol.converged);
            assert!((sol.alpha - 0.5 * c * c).abs() < 1e-9, "{c}: {}", sol.alpha);
            assert!(sol.u.iter().all(|v| v.abs() < 1e-9));
        }
    }

    #[test]
    fn pendulum_alpha_at_zero() {
        let disc = Discretization::new(Arc::new(Pendulum::new(0.1, 1)), CircleGrid::new(128).unwrap());
        let sol = disc.solve(0.0, &SolveOptions::default()).unwrap();
        assert!(sol.converged);
        assert!((sol.alpha - 0.1).abs() < 1e-9);
        assert_eq!(sol.u[0], 0.0);
        assert!(disc.residual(&sol).unwrap() < 1e-8);
    }
}
