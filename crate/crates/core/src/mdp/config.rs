use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planning step, depth rating, rate limits, discount and energy rewards.
///
/// Costs are non-positive rewards: `e_h` per step and `alpha_b` per metre of
/// commanded ascent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MdpConfig {
    /// Planning time step (s).
    pub delta: f64,
    /// Maximum allowable depth as a signed elevation (m).
    pub z_min: f64,
    /// Fastest ascent rate (m/s, positive).
    pub ascent_rate_max: f64,
    /// Fastest descent rate (m/s, negative).
    pub descent_rate_min: f64,
    pub gamma: f64,
    pub e_h: f64,
    pub alpha_b: f64,
    pub r_infeasible: f64,
}

impl Default for MdpConfig {
    fn default() -> Self {
        Self {
            delta: 3600.0,
            z_min: -1000.0,
            ascent_rate_max: 0.05,
            descent_rate_min: -0.05,
            gamma: 0.999,
            e_h: -1.0,
            alpha_b: -0.04,
            r_infeasible: -1000.0,
        }
    }
}

impl MdpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::config(format!("delta = {} must be positive", self.delta)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::config(format!("gamma = {} must lie in (0, 1)", self.gamma)));
        }
        if !(self.descent_rate_min < 0.0 && 0.0 < self.ascent_rate_max)
            || !self.descent_rate_min.is_finite()
            || !self.ascent_rate_max.is_finite()
        {
            return Err(Error::config(
                "rates must satisfy descent_rate_min < 0 < ascent_rate_max",
            ));
        }
        if !(self.e_h <= 0.0 && self.alpha_b <= 0.0) {
            return Err(Error::config("e_h and alpha_b are costs and must be <= 0"));
        }
        if !(self.r_infeasible < 0.0 && self.r_infeasible.is_finite()) {
            return Err(Error::config("r_infeasible must be negative"));
        }
        if !self.z_min.is_finite() {
            return Err(Error::config("z_min must be finite"));
        }
        Ok(())
    }

    /// Largest depth change per step when descending (negative).
    pub fn max_descent(&self) -> f64 {
        self.delta * self.descent_rate_min
    }

    /// Exclusive bound on the depth change per step when ascending.
    pub fn max_ascent(&self) -> f64 {
        self.delta * self.ascent_rate_max
    }

    /// The same problem with every reward multiplied by `c`.
    pub fn scaled_rewards(&self, c: f64) -> Self {
        Self {
            e_h: self.e_h * c,
            alpha_b: self.alpha_b * c,
            r_infeasible: self.r_infeasible * c,
            ..self.clone()
        }
    }
}
