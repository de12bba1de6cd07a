use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `θ_i = i / n` on the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleGrid {
    pub n: usize,
    /// Target width of the golden-section bracket when refining argmins.
    pub refinement_tol: f64,
}

impl CircleGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 16 {
            return Err(Error::InvalidParameter {
                key: "grid".into(),
                reason: format!("need at least 16 points, got {n}"),
            });
        }
        Ok(Self {
            n,
            refinement_tol: 1e-10,
        })
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Reduces a (possibly negative) index modulo `n`.
    pub fn index(&self, i: i64) -> usize {
        i.rem_euclid(self.n as i64) as usize
    }

    /// Index of the node nearest to `theta` on the circle.
    pub fn nearest(&self, theta: f64) -> usize {
        self.index((theta * self.n as f64).round() as i64)
    }

    /// Golden-section iterations needed to shrink a cell to `refinement_tol`.
    pub fn golden_iters(&self) -> usize {
        let ratio = (self.h() / self.refinement_tol).max(1.0);
        (ratio.ln() / 1.618_033_988_749_895_f64.ln()).ceil() as usize + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_grids() {
        assert!(CircleGrid::new(8).is_err());
        let g = CircleGrid::new(16).unwrap();
        assert_eq!(g.index(-1), 15);
        assert_eq!(g.nearest(0.99), 0);
        assert_eq!(g.nodes()[4], 0.25);
    }
}
