use super::operator::Discretization;
use super::solve::{solve_refined_from, SolveOptions, WeakKamSolution};
use crate::alpha_rho::PlateauReport;
use crate::error::{Error, Result};

/// The selected solution at `c ∈ [a, b]`: the weak KAM solution that agrees
/// with `λu_a + (1 - λ)u_b` on the Mather set, `λ = (b - c)/(b - a)`.
///
/// Since `α` is affine on the plateau the convex combination is a subsolution
/// of `T^c + α(c)`, and the increasing iteration started there settles on its
/// extension from the Mather set.
pub fn lipschitz_selection(
    disc: &Discretization,
    c: f64,
    plateau: &PlateauReport,
    u_a: &WeakKamSolution,
    u_b: &WeakKamSolution,
) -> Result<WeakKamSolution> {
    let (a, b) = (plateau.a, plateau.b);
    if !(a..=b).contains(&c) {
        return Err(Error::OutOfRange(c, a, b));
    }
    let lambda = if b > a { (b - c) / (b - a) } else { 1.0 };
    if lambda == 1.0 {
        return Ok(WeakKamSolution { c, ..u_a.clone() });
    }
    if lambda == 0.0 {
        return Ok(WeakKamSolution { c, ..u_b.clone() });
    }
    if u_a.n() != disc.grid.n || u_b.n() != disc.grid.n {
        return Err(Error::InvalidInput("endpoint solutions live on another grid".into()));
    }
    let init: Vec<f64> = u_a
        .u
        .iter()
        .zip(&u_b.u)
        .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
        .collect();
    let mut op = disc.operator(c)?;
    solve_refined_from(&mut op, &init, &SolveOptions::default())
}

/// The selected solution built through the Mañé potential of the Mather set.
/// Slower than [`lipschitz_selection`]; kept as an independent construction.
pub fn selection_by_extension(
    disc: &Discretization,
    c: f64,
    plateau: &PlateauReport,
    u_a: &WeakKamSolution,
    u_b: &WeakKamSolution,
) -> Result<WeakKamSolution> {
    let (a, b) = (plateau.a, plateau.b);
    if !(a..=b).contains(&c) {
        return Err(Error::OutOfRange(c, a, b));
    }
    if plateau.mather_points.is_empty() {
        return Err(Error::InvalidInput("plateau has no Mather set".into()));
    }
    let lambda = if b > a { (b - c) / (b - a) } else { 1.0 };
    let values: Vec<f64> = plateau
        .mather_points
        .iter()
        .map(|&x| lambda * u_a.value(x) + (1.0 - lambda) * u_b.value(x))
        .collect();
    let tol = 4.0 * disc.grid.h() * (1.0 + c.abs());
    disc.extend_from_mather(c, plateau.alpha(c), &plateau.mather_points, &values, tol)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::lax_oleinik::CircleGrid;
    use crate::twist::catalog::Pendulum;

    #[test]
    fn subsolution_iteration_matches_the_extension() {
        let disc = Discretization::new(Arc::new(Pendulum::new(0.1, 1)), CircleGrid::new(256).unwrap());
        let grid_only = SolveOptions::grid_only();
        let a0 = disc.solve(0.0, &grid_only).unwrap().alpha;
        let (mut lo, mut hi) = (0.5, 1.6);
        for _ in 0..20 {
            let mid = 0.5 * (lo + hi);
            if disc.solve(mid, &grid_only).unwrap().alpha > a0 + 1e-8 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let opts = SolveOptions::default();
        let plateau = PlateauReport {
            p: 0,
            q: 1,
            a: -lo,
            b: lo,
            alpha_a: a0,
            alpha_b: a0,
            mather_points: vec![0.0, 0.5],
            u_a: None,
            u_b: None,
        };
        let u_a = disc.solve(-hi, &opts).unwrap();
        let u_b = disc.solve(hi, &opts).unwrap();
        for c in [0.0, 0.4 * lo] {
            let fast = lipschitz_selection(&disc, c, &plateau, &u_a, &u_b).unwrap();
            let slow = selection_by_extension(&disc, c, &plateau, &u_a, &u_b).unwrap();
            let err = fast.u.iter().zip(&slow.u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            assert!(fast.converged && err < 1e-7, "c={c}: {err}");
        }
    }
}
