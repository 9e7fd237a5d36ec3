use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::RolloutStats;
use crate::error::{Error, Result};
use crate::flowfield::FlowGrid;
use crate::geometry::Point3;
use crate::mdp::CavityMdp;
use crate::policies::{Belief, GuidancePolicy};

pub const TIMEOUT_LABEL: &str = "timeout";

/// Three months of drift.
const DEFAULT_TIMEOUT: f64 = 90.0 * 86_400.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RolloutConfig {
    pub n_rollouts: usize,
    pub start: Point3,
    /// Rollouts still drifting after this long (s) are lost.
    pub timeout: f64,
    /// Simulation step (s).
    pub delta: f64,
    pub seed: u64,
}

impl RolloutConfig {
    pub fn new(start: Point3, n_rollouts: usize, seed: u64) -> Self {
        Self {
            n_rollouts,
            start,
            timeout: DEFAULT_TIMEOUT,
            delta: 3600.0,
            seed,
        }
    }

    pub fn validate(&self, mdp: &CavityMdp) -> Result<()> {
        if self.n_rollouts == 0 {
            return Err(Error::config("need at least one rollout"));
        }
        if !(self.delta > 0.0 && self.timeout > self.delta) {
            return Err(Error::config("timeout must exceed the positive step"));
        }
        if !self.start.is_finite() || !mdp.is_valid_state(self.start) {
            return Err(Error::config(format!("start {} is not a valid state", self.start)));
        }
        Ok(())
    }

    pub fn max_steps(&self) -> usize {
        (self.timeout / self.delta + 1e-9).floor() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    /// Time since the rollout started (s).
    pub t: f64,
    pub state: Point3,
    /// Commanded depth; `None` on the final point.
    pub action: Option<f64>,
    pub belief_mean: Point3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RolloutRecord {
    pub rollout_id: usize,
    /// Flow time at which the rollout started (s).
    pub start_time: f64,
    pub points: Vec<TrajectoryPoint>,
    pub outcome: String,
    pub time_to_outcome: f64,
    /// Undiscounted sum of step rewards plus the terminal reward.
    pub cumulative_reward: f64,
    /// Sum of step costs.
    pub energy: f64,
}

/// Start time of rollout `index`; the same for every policy under one seed.
pub fn start_time(grid: &FlowGrid, seed: u64, index: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * index as u64);
    let spec = grid.spec();
    rng.random_range(spec.t0()..spec.t_end())
}

fn rollout_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * index as u64 + 1);
    rng
}

fn wrap_time(grid: &FlowGrid, t: f64) -> f64 {
    let spec = grid.spec();
    let period = spec.t_end() - spec.t0();
    spec.t0() + (t - spec.t0()).rem_euclid(period)
}

/// One rollout: each step fixes a belief around the true position, queries
/// the policy, clips the depth to the true action set and drifts with the
/// ground-truth flow at full time resolution.
pub fn run_rollout(
    grid: &FlowGrid,
    mdp: &CavityMdp,
    policy: &dyn GuidancePolicy,
    config: &RolloutConfig,
    index: usize,
) -> Result<RolloutRecord> {
    config.validate(mdp)?;
    let kind = policy.kind();
    let sigma = kind.belief_sigma();
    let belief_samples = kind.belief_samples();
    let mut rng = rollout_rng(config.seed, index);
    let t_start = start_time(grid, config.seed, index);

    let mut state = config.start;
    let mut t = 0.0;
    let mut points = Vec::new();
    let mut reward = 0.0;
    let mut energy = 0.0;
    let mut outcome = mdp.classify(state);

    if outcome.is_none() {
        for _ in 0..config.max_steps() {
            let mean = if sigma == [0.0; 3] {
                state
            } else {
                let xi: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
                Point3::new(
                    state.x + sigma[0] * xi[0],
                    state.y + sigma[1] * xi[1],
                    state.z + sigma[2] * xi[2],
                )
            };
            let belief = Belief {
                mean,
                sigma,
                samples: belief_samples,
            };
            let wanted = match policy.action(&belief, &mut rng) {
                Ok(a) => a,
                Err(Error::NotNavigable { .. }) => state.z,
                Err(e) => return Err(e),
            };
            let a = mdp.action_set(state)?.clip(wanted);
            let r = mdp.reward(state, a);
            reward += r;
            energy -= r;
            points.push(TrajectoryPoint {
                t,
                state,
                action: Some(a),
                belief_mean: mean,
            });

            let v = grid.interpolate_velocity(state, wrap_time(grid, t_start + t))?;
            let next = Point3::new(state.x + v[0] * config.delta, state.y + v[1] * config.delta, a);
            t += config.delta;
            state = next;
            outcome = mdp.classify(state);
            if outcome.is_some() {
                break;
            }
        }
    }

    let label = match outcome {
        Some(term) => {
            reward += mdp.terminal_reward(term);
            mdp.terminal_label(term).to_string()
        }
        None => TIMEOUT_LABEL.to_string(),
    };
    points.push(TrajectoryPoint {
        t,
        state,
        action: None,
        belief_mean: state,
    });
    Ok(RolloutRecord {
        rollout_id: index,
        start_time: t_start,
        points,
        outcome: label,
        time_to_outcome: t,
        cumulative_reward: reward,
        energy,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub stats: RolloutStats,
    pub records: Vec<RolloutRecord>,
}

/// `n_rollouts` paired rollouts of every policy.
pub fn run_experiment(
    grid: &FlowGrid,
    mdp: &CavityMdp,
    policies: &[&dyn GuidancePolicy],
    config: &RolloutConfig,
    goal_label: &str,
) -> Result<Vec<ExperimentResult>> {
    config.validate(mdp)?;
    policies
        .iter()
        .map(|policy| {
            let records = (0..config.n_rollouts)
                .into_par_iter()
                .map(|i| run_rollout(grid, mdp, *policy, config, i))
                .collect::<Result<Vec<_>>>()?;
            let stats = RolloutStats::from_records(&policy.kind().to_string(), &records, goal_label);
            Ok(ExperimentResult { stats, records })
        })
        .collect()
}
