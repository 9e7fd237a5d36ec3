use std::sync::Arc;

use rand::RngCore;

use super::{Belief, GuidancePolicy, PolicyKind};
use crate::error::{Error, Result};
use crate::mdp::CavityMdp;

/// Holds depth and drifts with the current.
#[derive(Clone, Copy, Debug, Default)]
pub struct UncontrolledPolicy;

impl GuidancePolicy for UncontrolledPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Uncontrolled
    }

    fn action(&self, belief: &Belief, _rng: &mut dyn RngCore) -> Result<f64> {
        Ok(belief.mean.z)
    }
}

/// Tracks a fixed fraction of the local water column below the ice, within
/// the rate limits.
#[derive(Clone, Debug)]
pub struct ConstantFractionPolicy {
    mdp: Arc<CavityMdp>,
    fraction: f64,
}

impl ConstantFractionPolicy {
    pub fn new(mdp: Arc<CavityMdp>, fraction: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::config(format!("depth fraction {fraction} must lie in [0, 1]")));
        }
        Ok(Self { mdp, fraction })
    }

    /// Unclipped target depth at `(x, y)`.
    pub fn target(&self, x: f64, y: f64) -> Result<f64> {
        let c = self
            .mdp
            .envelope()
            .column_at(x, y)
            .ok_or(Error::NotNavigable { x, y, z: f64::NAN })?;
        Ok(c.ceiling - self.fraction * c.thickness())
    }
}

impl GuidancePolicy for ConstantFractionPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::ConstFrac(self.fraction)
    }

    fn action(&self, belief: &Belief, _rng: &mut dyn RngCore) -> Result<f64> {
        let s = belief.mean;
        let target = self.target(s.x, s.y)?;
        Ok(self.mdp.action_set(s)?.clip(target))
    }
}
