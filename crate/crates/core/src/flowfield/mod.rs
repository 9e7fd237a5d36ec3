//! Gridded flow fields: staggered storage, interpolation, navigability,
//! empirical velocity distributions, archives and synthetic cavities.

mod archive;
mod distribution;
mod envelope;
mod grid;
mod synth;

pub use archive::{read_grid_archive, write_grid_archive, GridManifest, VariableEntry};
pub use distribution::{
    retained_steps, subsample_stride, velocity_distribution_at, EmpiricalVelocityDistribution,
};
pub use envelope::{column_from_fractions, ColumnBounds, NavigableEnvelope};
pub use grid::{Component, Field4, FlowGrid, GridSpec, Stagger, StencilEntry};
pub use synth::{synthesize_cavity, CavityParams};

/// Navigable envelope of a grid (computed once at grid construction).
pub fn navigable_envelope(grid: &FlowGrid) -> NavigableEnvelope {
    NavigableEnvelope::from_wet_fractions(grid.spec(), grid.wet_fraction())
}
