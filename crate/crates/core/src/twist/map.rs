//! The twist map `F(θ, r) = (Θ, R)` evaluated implicitly from `S`.

use std::sync::Arc;

use super::generating::GeneratingFunction;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct TwistMap {
    gf: Arc<dyn GeneratingFunction>,
    pub newton_tol: f64,
    pub bracket_width: f64,
}

impl TwistMap {
    pub fn new(gf: Arc<dyn GeneratingFunction>) -> Self {
        Self {
            gf,
            newton_tol: 1e-12,
            bracket_width: 1.0,
        }
    }

    pub fn generating(&self) -> &dyn GeneratingFunction {
        self.gf.as_ref()
    }

    pub fn generating_arc(&self) -> Arc<dyn GeneratingFunction> {
        Arc::clone(&self.gf)
    }

    /// `(Θ, R)` with `r = -∂₁S(θ, Θ)` and `R = ∂₂S(θ, Θ)`.
    pub fn map_forward(&self, theta: f64, r: f64) -> Result<(f64, f64)> {
        let gf = self.generating();
        let limit = gf.superlinearity_bound(r.abs() + 1.0) + self.bracket_width;
        let big = self.solve_decreasing(
            |y| gf.d1(theta, y),
            |y| gf.d12(theta, y),
            -r,
            theta,
            limit,
            (theta, r),
        )?;
        Ok((big, gf.d2(theta, big)))
    }

    /// `(θ, r)` with `R = ∂₂S(θ, Θ)` and `r = -∂₁S(θ, Θ)`.
    pub fn map_inverse(&self, big_theta: f64, big_r: f64) -> Result<(f64, f64)> {
        let gf = self.generating();
        let limit = gf.superlinearity_bound(big_r.abs() + 1.0) + self.bracket_width;
        let theta = self.solve_decreasing(
            |x| gf.d2(x, big_theta),
            |x| gf.d12(x, big_theta),
            big_r,
            big_theta,
            limit,
            (big_theta, big_r),
        )?;
        Ok((theta, -gf.d1(theta, big_theta)))
    }

    /// Solves `f(x) = target` for a strictly decreasing `f` near `center`,
    /// widening the bracket geometrically up to `center ± limit`.
    fn solve_decreasing(
        &self,
        f: impl Fn(f64) -> f64,
        df: impl Fn(f64) -> f64,
        target: f64,
        center: f64,
        limit: f64,
        at: (f64, f64),
    ) -> Result<f64> {
        let g = |x: f64| f(x) - target;
        let mut width = self.bracket_width;
        let (mut lo, mut hi);
        loop {
            lo = center - width;
            hi = center + width;
            if g(lo) >= 0.0 && g(hi) <= 0.0 {
                break;
            }
            if width > limit {
                return Err(Error::BracketNotFound { at, width });
            }
            width *= 2.0;
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let gx = g(x);
            if gx.abs() <= self.newton_tol {
                return Ok(x);
            }
            if gx > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = df(x);
            let newton = x - gx / d;
            x = if d < 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
            if hi - lo <= f64::EPSILON * (1.0 + x.abs()) {
                return Ok(x);
            }
        }
        Ok(x)
    }
}
