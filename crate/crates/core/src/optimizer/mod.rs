//! Allocation of delivery units to vehicle types.

mod allocation;
mod anneal;
mod grid;
mod problem;

pub use allocation::{neighbor_move, AllocationMatrix};
pub use anneal::{simulated_annealing, OptimizationResult, SaConfig};
pub use grid::{brute_force_grid, grid_size, DEFAULT_GRID_LIMIT};
pub use problem::{AllocationProblem, Evaluation, Slacks, FEASIBILITY_TOLERANCE};
