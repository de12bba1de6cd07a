//! Generating functions, the twist map they define and the built-in catalog.

pub mod catalog;
pub mod generating;
pub mod map;

pub use catalog::{load, load_unchecked, parse_params, AnalyticTruth, MapCatalogEntry, MapParams};
pub use generating::{
    euler_lagrange_residual, eval_action, inspect, second_variation_min_eigenvalue,
    segment_action, validate, GeneratingFunction, GeneratingReport,
};
pub use map::TwistMap;
