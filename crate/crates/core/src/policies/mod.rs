//! Guidance policies: uncontrolled drift, constant depth fraction, the MDP
//! policy and QMDP over a Gaussian position belief.

mod baselines;
mod kind;
mod planned;

use rand::RngCore;

use crate::error::Result;
use crate::geometry::Point3;

pub use baselines::{ConstantFractionPolicy, UncontrolledPolicy};
pub use kind::PolicyKind;
pub use planned::{MdpPolicy, QmdpPolicy};

/// Axis-aligned Gaussian position belief.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Belief {
    pub mean: Point3,
    pub sigma: [f64; 3],
    /// Sample budget for expectations over the belief.
    pub samples: usize,
}

impl Belief {
    /// Certain belief at `p`.
    pub fn exact(p: Point3) -> Self {
        Self {
            mean: p,
            sigma: [0.0; 3],
            samples: 1,
        }
    }

    pub fn is_certain(&self) -> bool {
        self.sigma == [0.0; 3]
    }
}

/// A guidance policy maps a belief to a target depth.
pub trait GuidancePolicy: Send + Sync {
    fn kind(&self) -> PolicyKind;

    fn action(&self, belief: &Belief, rng: &mut dyn RngCore) -> Result<f64>;
}
