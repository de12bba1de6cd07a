//! Generating functions of exact symplectic twist maps.
//!
//! A generating function `S(x, y)` on the lift determines the map through
//! `r = -∂S/∂x (x, y)` and `R = ∂S/∂y (x, y)`. The implementations in the
//! catalog provide closed-form (or envelope-theorem) partial derivatives up
//! to second order so that implicit solves and second variations are exact.

use std::fmt::Debug;

use crate::error::{Error, Result};

pub trait GeneratingFunction: Debug + Send + Sync {
    /// The action `S(x, y)` of a step from lift coordinate `x` to `y`.
    fn eval(&self, x: f64, y: f64) -> f64;

    /// `∂S/∂x`.
    fn d1(&self, x: f64, y: f64) -> f64;

    /// `∂S/∂y`.
    fn d2(&self, x: f64, y: f64) -> f64;

    fn d11(&self, x: f64, y: f64) -> f64;

    /// Mixed partial; negative everywhere for a twist map.
    fn d12(&self, x: f64, y: f64) -> f64;

    fn d22(&self, x: f64, y: f64) -> f64;

    /// `(S, ∂₁S, ∂₁₁S)` at once, for implementations that share work.
    fn eval_d1_d11(&self, x: f64, y: f64) -> (f64, f64, f64) {
        (self.eval(x, y), self.d1(x, y), self.d11(x, y))
    }

    /// A displacement `B(M)` such that `|y - x| > B(M)` implies `S(x, y) / |y - x| > M`.
    fn superlinearity_bound(&self, m: f64) -> f64;

    /// Half-width of the strip `|y - x| <= w` on which the twist sign is certified.
    fn twist_strip(&self) -> f64 {
        self.superlinearity_bound(1.0)
    }
}

/// Outcome of the load-time invariant checks of a generating function.
#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct GeneratingReport {
    pub periodicity_defect: f64,
    pub max_d12: f64,
    pub derivative_rel_err: f64,
    pub superlinearity_violation: f64,
}

impl GeneratingReport {
    pub fn periodic(&self) -> bool {
        self.periodicity_defect <= 1e-12
    }

    pub fn twist(&self) -> bool {
        self.max_d12 < 0.0
    }

    pub fn superlinear(&self) -> bool {
        self.superlinearity_violation <= 0.0
    }

    pub fn derivatives_consistent(&self) -> bool {
        self.derivative_rel_err < 1e-5
    }

    pub fn passed(&self) -> bool {
        self.periodic() && self.twist() && self.superlinear() && self.derivatives_consistent()
    }
}

/// Samples the periodicity, twist, finite-difference and superlinearity
/// invariants on a deterministic lattice.
pub fn inspect(gf: &dyn GeneratingFunction) -> GeneratingReport {
    let mut report = GeneratingReport {
        max_d12: f64::NEG_INFINITY,
        ..Default::default()
    };
    let strip = gf.twist_strip();
    let nx = 24;
    let nd = 24;
    for i in 0..nx {
        let x = (i as f64 + 0.37) / nx as f64;
        for j in 0..=nd {
            let y = x - strip + 2.0 * strip * j as f64 / nd as f64;

            let s = gf.eval(x, y);
            let shifted = gf.eval(x + 1.0, y + 1.0);
            let defect = (shifted - s).abs() / (1.0 + s.abs());
            report.periodicity_defect = report.periodicity_defect.max(defect);

            report.max_d12 = report.max_d12.max(gf.d12(x, y));

            let step = 1e-5;
            let fd1 = (gf.eval(x + step, y) - gf.eval(x - step, y)) / (2.0 * step);
            let fd2 = (gf.eval(x, y + step) - gf.eval(x, y - step)) / (2.0 * step);
            let scale = 1.0 + s.abs() + gf.d1(x, y).abs() + gf.d2(x, y).abs();
            let err = ((fd1 - gf.d1(x, y)).abs() + (fd2 - gf.d2(x, y)).abs()) / scale;
            report.derivative_rel_err = report.derivative_rel_err.max(err);
        }
    }
    for &m in &[0.5, 1.0, 2.0, 4.0] {
        let b = gf.superlinearity_bound(m);
        for i in 0..8 {
            let x = i as f64 / 8.0;
            for &mult in &[1.001, 1.5, 3.0] {
                for sign in [-1.0, 1.0] {
                    let d = sign * b * mult + sign * 1e-9;
                    let ratio = gf.eval(x, x + d) / d.abs();
                    report.superlinearity_violation =
                        report.superlinearity_violation.max(m - ratio);
                }
            }
        }
    }
    report
}

/// Rejects generating functions that fail any load-time invariant.
pub fn validate(gf: &dyn GeneratingFunction) -> Result<GeneratingReport> {
    let report = inspect(gf);
    if !report.periodic() {
        return Err(Error::MalformedGenerating(format!(
            "periodicity defect {:.3e}",
            report.periodicity_defect
        )));
    }
    if !report.twist() {
        return Err(Error::MalformedGenerating(format!(
            "twist condition violated: max d12 = {:.3e}",
            report.max_d12
        )));
    }
    if !report.superlinear() {
        return Err(Error::MalformedGenerating(format!(
            "superlinearity bound violated by {:.3e}",
            report.superlinearity_violation
        )));
    }
    if !report.derivatives_consistent() {
        return Err(Error::MalformedGenerating(format!(
            "partials disagree with finite differences (rel. err {:.3e})",
            report.derivative_rel_err
        )));
    }
    Ok(report)
}

/// Evaluates `S`, rejecting non-finite output.
pub fn eval_action(gf: &dyn GeneratingFunction, x: f64, y: f64) -> Result<f64> {
    let s = gf.eval(x, y);
    if s.is_finite() {
        Ok(s)
    } else {
        Err(Error::MalformedGenerating(format!(
            "non-finite action at ({x}, {y})"
        )))
    }
}

/// Discrete Euler–Lagrange residuals `∂₂S(x_{k-1}, x_k) + ∂₁S(x_k, x_{k+1})` at
/// the interior points of a configuration.
pub fn euler_lagrange_residual(gf: &dyn GeneratingFunction, segment: &[f64]) -> Vec<f64> {
    segment
        .windows(3)
        .map(|w| gf.d2(w[0], w[1]) + gf.d1(w[1], w[2]))
        .collect()
}

/// Total action `Σ S(x_k, x_{k+1})` of a configuration.
pub fn segment_action(gf: &dyn GeneratingFunction, segment: &[f64]) -> f64 {
    segment.windows(2).map(|w| gf.eval(w[0], w[1])).sum()
}

/// Smallest eigenvalue of the second variation of the action with both
/// endpoints held fixed (the discrete Jacobi test).
pub fn second_variation_min_eigenvalue(gf: &dyn GeneratingFunction, segment: &[f64]) -> f64 {
    let m = segment.len().saturating_sub(2);
    if m == 0 {
        return f64::INFINITY;
    }
    let mut h = nalgebra::DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        let (a, b, c) = (segment[k], segment[k + 1], segment[k + 2]);
        h[(k, k)] = gf.d22(a, b) + gf.d11(b, c);
        if k + 1 < m {
            let off = gf.d12(b, c);
            h[(k, k + 1)] = off;
            h[(k + 1, k)] = off;
        }
    }
    h.symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}
