use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lax_oleinik::{Discretization, SolveOptions};

/// Sampled `α(c)` with `ρ = α'` by central differences.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaCurve {
    pub c_samples: Vec<f64>,
    pub alpha_values: Vec<f64>,
    pub rho_values: Vec<f64>,
    /// Largest `α(½(c_i + c_j)) - ½(α(c_i) + α(c_j))` over sample pairs whose
    /// midpoint is itself a sample.
    pub convexity_defect: f64,
    pub converged: Vec<bool>,
}

impl AlphaCurve {
    pub fn from_samples(c_samples: Vec<f64>, alpha_values: Vec<f64>, converged: Vec<bool>) -> Self {
        let rho_values = central_differences(&c_samples, &alpha_values);
        let convexity_defect = convexity_defect(&alpha_values);
        Self {
            c_samples,
            alpha_values,
            rho_values,
            convexity_defect,
            converged,
        }
    }

    pub fn len(&self) -> usize {
        self.c_samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c_samples.is_empty()
    }

    pub fn step(&self) -> f64 {
        (self.c_samples[self.len() - 1] - self.c_samples[0]) / (self.len() - 1) as f64
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&b| b)
    }

    /// Largest decrease of `ρ` between consecutive samples (zero if monotone).
    pub fn monotonicity_defect(&self) -> f64 {
        self.rho_values
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }

    /// `ρ` at `c` by linear interpolation of the samples.
    pub fn rho_at(&self, c: f64) -> Result<f64> {
        interpolate(&self.c_samples, &self.rho_values, c)
    }

    pub fn alpha_at(&self, c: f64) -> Result<f64> {
        interpolate(&self.c_samples, &self.alpha_values, c)
    }

    /// Per-time rotation numbers for a map that is the time-`t0` step of a flow.
    pub fn rho_per_time(&self, t0: f64) -> Vec<f64> {
        self.rho_values.iter().map(|r| r / t0).collect()
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    if !(lo..=hi).contains(&x) {
        return Err(Error::OutOfRange(x, lo, hi));
    }
    let k = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    Ok(ys[k - 1] + t * (ys[k] - ys[k - 1]))
}

/// Derivative of samples on an even grid, second order throughout, with
/// one-sided stencils at the ends.
pub fn central_differences(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 3 {
        let d = (y[n - 1] - y[0]) / (x[n - 1] - x[0]);
        return vec![d; n];
    }
    (0..n)
        .map(|i| match i {
            0 => (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (x[2] - x[0]),
            i if i == n - 1 => (3.0 * y[i] - 4.0 * y[i - 1] + y[i - 2]) / (x[i] - x[i - 2]),
            i => (y[i + 1] - y[i - 1]) / (x[i + 1] - x[i - 1]),
        })
        .collect()
}

fn convexity_defect(alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 2..n).step_by(2) {
            let m = (i + j) / 2;
            worst = worst.max(alpha[m] - 0.5 * (alpha[i] + alpha[j]));
        }
    }
    worst
}

/// Solves at `steps` evenly spaced classes of `[lo, hi]`, in parallel.
pub fn sample_alpha_curve(
    disc: &Discretization,
    range: (f64, f64),
    steps: usize,
    opts: &SolveOptions,
) -> Result<AlphaCurve> {
    if steps < 3 {
        return Err(Error::InvalidParameter {
            key: "steps".into(),
            reason: "need at least 3 samples".into(),
        });
    }
    let (lo, hi) = range;
    disc.prepare(lo, hi)?;
    let cs: Vec<f64> = (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect();
    let sols = cs
        .par_iter()
        .map(|&c| disc.solve(c, opts).map(|s| (s.alpha, s.converged)))
        .collect::<Result<Vec<_>>>()?;
    let (alpha, conv) = sols.into_iter().unzip();
    Ok(AlphaCurve::from_samples(cs, alpha, conv))
}
