use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::rollout::RolloutRecord;
use super::stats::RolloutStats;
use crate::error::{Error, Result};

pub const TRAJECTORIES_FILE: &str = "trajectories.csv";
pub const STATS_FILE: &str = "stats.json";
pub const OUTCOMES_FILE: &str = "outcomes.csv";

/// Writes `trajectories.csv`, `outcomes.csv` and `stats.json` into `dir`.
pub fn export_rollouts(records: &[RolloutRecord], stats: &RolloutStats, dir: &Path) -> Result<Vec<String>> {
    if records.is_empty() {
        return Err(Error::config("no rollout records to export"));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut traj = String::from("rollout_id,t,x,y,z,action,outcome\n");
    let mut outcomes = String::from("rollout_id,start_time,outcome,time_s,time_h,cumulative_reward,energy\n");
    for r in records {
        for p in &r.points {
            let action = p.action.map(|a| a.to_string()).unwrap_or_default();
            let _ = writeln!(
                traj,
                "{},{},{},{},{},{},{}",
                r.rollout_id, p.t, p.state.x, p.state.y, p.state.z, action, r.outcome
            );
        }
        let _ = writeln!(
            outcomes,
            "{},{},{},{},{},{},{}",
            r.rollout_id,
            r.start_time,
            r.outcome,
            r.time_to_outcome,
            r.time_to_outcome / 3600.0,
            r.cumulative_reward,
            r.energy
        );
    }
    let json = serde_json::to_string_pretty(stats).map_err(|e| Error::json(dir.join(STATS_FILE), e))?;
    for (name, text) in [(TRAJECTORIES_FILE, &traj), (OUTCOMES_FILE, &outcomes), (STATS_FILE, &json)] {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(vec![TRAJECTORIES_FILE.into(), OUTCOMES_FILE.into(), STATS_FILE.into()])
}

pub fn read_stats(path: &Path) -> Result<RolloutStats> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}
