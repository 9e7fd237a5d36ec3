//! Monte Carlo rollouts of guidance policies against ground-truth flow.

mod export;
mod rollout;
mod stats;

pub use export::{export_rollouts, read_stats, OUTCOMES_FILE, STATS_FILE, TRAJECTORIES_FILE};
pub use rollout::{
    run_experiment, run_rollout, start_time, ExperimentResult, RolloutConfig, RolloutRecord,
    TrajectoryPoint, TIMEOUT_LABEL,
};
pub use stats::{median, sample_std, RolloutStats};
