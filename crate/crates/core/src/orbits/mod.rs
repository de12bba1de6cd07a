//! Minimizing backward orbits, Mather sets and the twisted-vertical count.

pub mod mather;
pub mod segment;
pub mod vertical;

pub use mather::{mather_set, periodic_minimizer, MatherSet};
pub use segment::{
    backward_orbit, backward_orbit_from, calibration_residual, crossing_count, grid_tol,
    polish_euler_lagrange, rotation_number_of_segment, OrbitSegment, OrbitSource, RotationEstimate,
};
pub use vertical::twisted_vertical_minimizers;
