use serde::Serialize;

use super::beta::{beta_oracle, rationals_in};
use super::curve::AlphaCurve;
use crate::error::{Error, Result};
use crate::lax_oleinik::{lipschitz_selection, Discretization, SolveOptions, WeakKamSolution};

/// A rational plateau `ρ⁻¹(p/q) = [a, b]`.
#[derive(Debug, Clone, Serialize)]
pub struct PlateauReport {
    pub p: i64,
    pub q: u64,
    pub a: f64,
    pub b: f64,
    pub alpha_a: f64,
    pub alpha_b: f64,
    /// Circle points of the minimizing `(p, q)`-periodic orbits.
    pub mather_points: Vec<f64>,
    #[serde(skip)]
    pub u_a: Option<WeakKamSolution>,
    #[serde(skip)]
    pub u_b: Option<WeakKamSolution>,
}

impl PlateauReport {
    pub fn rotation(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn contains(&self, c: f64) -> bool {
        self.a <= c && c <= self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    /// `α` on the plateau, where it is affine with slope `p/q`.
    pub fn alpha(&self, c: f64) -> f64 {
        self.alpha_a + self.rotation() * (c - self.a)
    }
}

/// Maximal runs of at least three samples with `|ρ - p/q| < flat_tol`, for every
/// `p/q` with `q <= q_max` in the sampled `ρ` range.
pub fn detect_plateaus(curve: &AlphaCurve, q_max: u64, flat_tol: f64) -> Vec<PlateauReport> {
    let rho = &curve.rho_values;
    let lo = rho.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = Vec::new();
    for (p, q) in rationals_in(lo - flat_tol, hi + flat_tol, q_max) {
        let target = p as f64 / q as f64;
        let mut i = 0;
        while i < rho.len() {
            if (rho[i] - target).abs() >= flat_tol {
                i += 1;
                continue;
            }
            let start = i;
            while i < rho.len() && (rho[i] - target).abs() < flat_tol {
                i += 1;
            }
            if i - start >= 3 {
                let (s, e) = (start, i - 1);
                out.push(PlateauReport {
                    p,
                    q,
                    a: curve.c_samples[s],
                    b: curve.c_samples[e],
                    alpha_a: curve.alpha_values[s],
                    alpha_b: curve.alpha_values[e],
                    mather_points: Vec::new(),
                    u_a: None,
                    u_b: None,
                });
            }
        }
    }
    out.sort_by(|x, y| x.a.total_cmp(&y.a));
    out
}

#[derive(Debug, Clone, Copy, Serialize, serde::Deserialize)]
pub struct PlateauRefinement {
    /// Bisection stops once the end is bracketed this tightly.
    pub width_tol: f64,
    /// Departure of `α` from the affine plateau value that counts as "off".
    pub gap_tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for PlateauRefinement {
    fn default() -> Self {
        Self {
            width_tol: 1e-6,
            gap_tol: 1e-8,
            restarts: 8,
            seed: 0,
        }
    }
}

/// Refines the plateau ends by bisection on whether `α` leaves the affine
/// function `α_ref + (p/q)(c - c_ref)` by more than `gap_tol`, stores the
/// endpoint solutions (taken at the outer probe, within `width_tol` of the
/// end) and the Mather set of the periodic minimizers.
pub fn refine_plateau(
    disc: &Discretization,
    report: &mut PlateauReport,
    step: f64,
    cfg: &PlateauRefinement,
    opts: &SolveOptions,
) -> Result<()> {
    let PlateauRefinement {
        width_tol,
        gap_tol,
        restarts,
        seed,
    } = *cfg;
    let probe_opts = SolveOptions {
        refine: false,
        ..*opts
    };
    let rho = report.rotation();
    let c_ref = 0.5 * (report.a + report.b);
    let alpha_ref = disc.solve(c_ref, &probe_opts)?.alpha;
    let off = |c: f64| -> Result<bool> {
        let a = disc.solve(c, &probe_opts)?.alpha;
        Ok(a - (alpha_ref + rho * (c - c_ref)) > gap_tol)
    };
    let mut ends = [(report.a, -1.0), (report.b, 1.0)].map(|(inner, dir)| {
        let mut inside = inner;
        let mut outside = inner + dir * step;
        // make sure the outer probe really is off the plateau
        let mut tries = 0;
        while !off(outside).unwrap_or(true) && tries < 8 {
            inside = outside;
            outside += dir * step;
            tries += 1;
        }
        while (outside - inside).abs() > width_tol {
            let mid = 0.5 * (inside + outside);
            match off(mid) {
                Ok(true) => outside = mid,
                Ok(false) => inside = mid,
                Err(_) => break,
            }
        }
        (inside, outside)
    });
    if ends[0].0 > ends[1].0 {
        ends.swap(0, 1);
    }
    let (a_in, a_out) = ends[0];
    let (b_in, b_out) = ends[1];
    report.a = a_in;
    report.b = b_in;
    let u_a = disc.solve(a_out, opts)?;
    let u_b = disc.solve(b_out, opts)?;
    report.alpha_a = alpha_ref + rho * (a_in - c_ref);
    report.alpha_b = alpha_ref + rho * (b_in - c_ref);
    report.u_a = Some(u_a);
    report.u_b = Some(u_b);
    let beta = beta_oracle(disc.generating(), report.p, report.q, restarts, seed)?;
    report.mather_points = beta.mather_points();
    Ok(())
}

/// `ρ⁻¹(ρ₀)`: the detected plateau at a rational level, otherwise the single
/// class found by bisection on the sampled `ρ`, widened to the plateau it
/// falls in.
pub fn inverse_rho(curve: &AlphaCurve, plateaus: &[PlateauReport], rho0: f64) -> Result<(f64, f64)> {
    let rho = &curve.rho_values;
    let (lo, hi) = (rho[0], rho[rho.len() - 1]);
    if !(lo..=hi).contains(&rho0) {
        return Err(Error::OutOfRange(rho0, lo, hi));
    }
    if let Some(p) = plateaus.iter().find(|p| (p.rotation() - rho0).abs() < 1e-12) {
        return Ok((p.a, p.b));
    }
    let k = rho.partition_point(|&r| r < rho0).clamp(1, rho.len() - 1);
    let (r0, r1) = (rho[k - 1], rho[k]);
    let (c0, c1) = (curve.c_samples[k - 1], curve.c_samples[k]);
    let c = if r1 > r0 { c0 + (rho0 - r0) / (r1 - r0) * (c1 - c0) } else { c0 };
    let slack = 0.5 * curve.step();
    match plateaus.iter().find(|p| p.a - slack <= c && c <= p.b + slack) {
        Some(p) => Ok((p.a, p.b)),
        None => Ok((c, c)),
    }
}

/// The family `c ↦ u(·, c)` that uses the Lipschitz selection inside the
/// refined plateaus and the (unique) solution elsewhere.
#[derive(Debug)]
pub struct SelectedFamily<'a> {
    pub disc: &'a Discretization,
    pub plateaus: Vec<PlateauReport>,
    pub opts: SolveOptions,
}

impl<'a> SelectedFamily<'a> {
    pub fn new(disc: &'a Discretization, plateaus: Vec<PlateauReport>, opts: SolveOptions) -> Self {
        Self { disc, plateaus, opts }
    }

    pub fn plateau_at(&self, c: f64) -> Option<&PlateauReport> {
        self.plateaus.iter().find(|p| p.contains(c) && p.u_a.is_some())
    }

    pub fn solution(&self, c: f64) -> Result<WeakKamSolution> {
        match self.plateau_at(c) {
            Some(p) => lipschitz_selection(
                self.disc,
                c,
                p,
                p.u_a.as_ref().expect("refined plateau"),
                p.u_b.as_ref().expect("refined plateau"),
            ),
            None => self.disc.solve(c, &self.opts),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve_from(cs: &[f64], rho: &[f64]) -> AlphaCurve {
        AlphaCurve {
            c_samples: cs.to_vec(),
            alpha_values: vec![0.0; cs.len()],
            rho_values: rho.to_vec(),
            convexity_defect: 0.0,
            converged: vec![true; cs.len()],
        }
    }

    #[test]
    fn flat_runs_become_plateaus() {
        let cs: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let rho = [-0.2, -0.1, 0.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.5, 0.5, 0.6];
        let ps = detect_plateaus(&curve_from(&cs, &rho), 4, 1e-3);
        assert_eq!(ps.len(), 1);
        assert_eq!((ps[0].p, ps[0].q), (0, 1));
        assert!((ps[0].a - 0.2).abs() < 1e-12 && (ps[0].b - 0.5).abs() < 1e-12);
        let (a, b) = inverse_rho(&curve_from(&cs, &rho), &ps, 0.0).unwrap();
        assert_eq!((a, b), (ps[0].a, ps[0].b));
        let (a, b) = inverse_rho(&curve_from(&cs, &rho), &ps, 0.15).unwrap();
        assert!((a - 0.65).abs() < 1e-12 && a == b);
    }
}
