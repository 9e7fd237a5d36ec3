use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rollout::RolloutRecord;

/// Outcome summary of one policy; times in hours over successful rollouts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RolloutStats {
    pub policy: String,
    pub goal: String,
    pub n_rollouts: usize,
    pub successes: usize,
    pub success_fraction: f64,
    pub median_time_h: Option<f64>,
    pub std_time_h: Option<f64>,
    pub mean_energy: f64,
    pub outcome_counts: BTreeMap<String, usize>,
}

impl RolloutStats {
    pub fn from_records(policy: &str, records: &[RolloutRecord], goal: &str) -> Self {
        let mut outcome_counts = BTreeMap::new();
        for r in records {
            *outcome_counts.entry(r.outcome.clone()).or_insert(0) += 1;
        }
        let times: Vec<f64> = records
            .iter()
            .filter(|r| r.outcome == goal)
            .map(|r| r.time_to_outcome / 3600.0)
            .collect();
        let n = records.len();
        Self {
            policy: policy.to_string(),
            goal: goal.to_string(),
            n_rollouts: n,
            successes: times.len(),
            success_fraction: if n == 0 { 0.0 } else { times.len() as f64 / n as f64 },
            median_time_h: median(&times),
            std_time_h: (!times.is_empty()).then(|| sample_std(&times)),
            mean_energy: if n == 0 {
                0.0
            } else {
                records.iter().map(|r| r.energy).sum::<f64>() / n as f64
            },
            outcome_counts,
        }
    }
}

/// Median, averaging the two middle values of an even count.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

/// Sample standard deviation (n - 1 denominator), zero below two values.
pub fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}
