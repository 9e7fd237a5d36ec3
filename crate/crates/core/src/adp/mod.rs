//! Approximate dynamic programming on a uniform lattice: inverse-distance
//! value interpolation, value iteration and nearest-node policy lookup.

mod archive;
mod lattice;
mod solver;

pub use archive::{read_solution, read_solve_meta, write_solution, SolveMeta, SOLUTION_FORMAT};
pub use lattice::{ExclusionReason, InterpWeights, LatticeGeometry, LatticeSpec, NodeStatus};
pub use solver::{
    bellman_backup, greedy_policy, initial_values, iterate, value_iteration, CompiledKernel,
    Policy, QTable, Solution, SolveOptions, ValueFunction,
};
