//! Continuous-state decision process for depth-controlled drift.

mod config;
mod model;
mod region;

pub use config::MdpConfig;
pub use model::{
    ActionSet, CavityMdp, FnVelocityModel, GridVelocityModel, StepOutcome, Terminal,
    VelocityModel, INFEASIBLE_LABEL,
};
pub use region::{point_in_polygon, TerminalRegion};
