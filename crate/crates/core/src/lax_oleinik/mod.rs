//! The negative Lax-Oleinik operator, weak KAM solutions, Mañé potentials and
//! the selection of solutions inside rotation plateaus.

pub mod grid;
pub mod mane;
pub mod operator;
pub mod selection;
pub mod solve;

pub use grid::CircleGrid;
pub use mane::ManePotential;
pub use operator::{apply_t, projected_cost, ActionTable, CostRows, Discretization, LaxOleinik};
pub use selection::{lipschitz_selection, selection_by_extension};
pub use solve::{solve_refined_from, solve_weak_kam, solve_with, SolveOptions, WeakKamSolution};
