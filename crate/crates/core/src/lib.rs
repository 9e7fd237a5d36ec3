//! Guidance toolkit for buoyancy-controlled vehicles drifting in uncertain
//! three-dimensional flow.
//!
//! The crate is organised bottom-up:
//!
//! - [`flowfield`]: staggered 4-D velocity grids, navigability envelopes,
//!   empirical velocity distributions, archive I/O and a synthetic cavity
//!   generator.
//! - [`mdp`]: the continuous-state decision process (valid states, depth
//!   actions, terminal regions, the drift transition and energy rewards).
//! - [`adp`]: the planning lattice, inverse-distance value interpolation and
//!   value iteration.
//! - [`policies`]: uncontrolled, constant depth fraction, MDP and QMDP
//!   guidance policies behind one trait.
//! - [`simulator`]: Monte Carlo rollouts against ground-truth flow, outcome
//!   statistics and CSV/JSON export.
//! - [`cli`]: the `icecav` command line (synth, solve, rollout, report).

pub mod adp;
pub mod cli;
pub mod error;
pub mod flowfield;
pub mod geometry;
pub mod mdp;
pub mod policies;
pub mod scenario;
pub mod simulator;

pub use error::{Axis, Error, Result};
pub use geometry::Point3;
