//! Mather's α function, the rotation number `ρ = α'`, rational plateaus and
//! the periodic-orbit oracle for `α`.

pub mod beta;
pub mod curve;
pub mod plateau;

pub use beta::{beta_oracle, legendre_lower_bound, BetaResult, PeriodicMinimizer};
pub use curve::{sample_alpha_curve, AlphaCurve};
pub use plateau::{
    detect_plateaus, inverse_rho, refine_plateau, PlateauRefinement, PlateauReport, SelectedFamily,
};
