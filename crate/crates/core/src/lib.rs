//! Weak KAM solutions, Mather's α function, pseudographs and minimizing
//! orbits for exact symplectic twist maps of the annulus.

pub mod alpha_rho;
pub mod circle;
pub mod cli;
pub mod error;
pub mod lax_oleinik;
pub mod orbits;
pub mod pseudograph;
pub mod twist;

pub use error::{Error, Result};
