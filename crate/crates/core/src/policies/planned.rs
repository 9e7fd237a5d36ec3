use std::collections::BTreeMap;
use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use super::{Belief, GuidancePolicy, PolicyKind};
use crate::adp::{CompiledKernel, QTable, Solution};
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::mdp::CavityMdp;

/// Optimal lattice policy at the nearest node to the belief mean.
#[derive(Clone, Debug)]
pub struct MdpPolicy {
    mdp: Arc<CavityMdp>,
    solution: Arc<Solution>,
}

impl MdpPolicy {
    pub fn new(mdp: Arc<CavityMdp>, solution: Arc<Solution>) -> Self {
        Self { mdp, solution }
    }
}

impl GuidancePolicy for MdpPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Mdp
    }

    fn action(&self, belief: &Belief, _rng: &mut dyn RngCore) -> Result<f64> {
        self.solution.policy_lookup(&self.mdp, belief.mean)
    }
}

/// QMDP: the action maximising the lattice Q values averaged over samples
/// of the belief, each sample represented by its nearest valid node.
#[derive(Clone, Debug)]
pub struct QmdpPolicy {
    mdp: Arc<CavityMdp>,
    solution: Arc<Solution>,
    q: Arc<QTable>,
    sigma: [f64; 3],
    samples: usize,
}

impl QmdpPolicy {
    /// Builds the Q table of `solution` under the planning model of `mdp`.
    pub fn new(mdp: Arc<CavityMdp>, solution: Arc<Solution>, sigma: [f64; 3], samples: usize) -> Result<Self> {
        let kernel = CompiledKernel::build(&mdp, &solution.lattice)?;
        let q = Arc::new(kernel.q_table(&solution.value.values));
        Self::with_q_table(mdp, solution, q, sigma, samples)
    }

    pub fn with_q_table(
        mdp: Arc<CavityMdp>,
        solution: Arc<Solution>,
        q: Arc<QTable>,
        sigma: [f64; 3],
        samples: usize,
    ) -> Result<Self> {
        PolicyKind::Qmdp { sigma, samples }.validate()?;
        Ok(Self {
            mdp,
            solution,
            q,
            sigma,
            samples,
        })
    }

    pub fn q_table(&self) -> &Arc<QTable> {
        &self.q
    }

    /// Valid states drawn from the belief; at most `10 * N_b` attempts, then
    /// the mean alone.
    pub fn sample_belief(&self, belief: &Belief, rng: &mut dyn RngCore) -> Vec<Point3> {
        let m = belief.mean;
        if belief.is_certain() {
            return if self.mdp.is_valid_state(m) { vec![m] } else { Vec::new() };
        }
        let budget = belief.samples.max(1);
        let mut kept = Vec::with_capacity(budget);
        for _ in 0..10 * budget {
            if kept.len() == budget {
                break;
            }
            let xi: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut *rng));
            let p = Point3::new(
                m.x + belief.sigma[0] * xi[0],
                m.y + belief.sigma[1] * xi[1],
                m.z + belief.sigma[2] * xi[2],
            );
            if self.mdp.is_valid_state(p) {
                kept.push(p);
            }
        }
        if kept.is_empty() && self.mdp.is_valid_state(m) {
            kept.push(m);
        }
        kept
    }

    /// Action for a belief given its retained samples.
    pub fn action_for_samples(&self, mean: Point3, samples: &[Point3]) -> Result<f64> {
        let lattice = &self.solution.lattice;
        let mut support: BTreeMap<usize, usize> = BTreeMap::new();
        for &p in samples {
            if let Some(n) = lattice.nearest_valid_node(p) {
                *support.entry(n).or_insert(0) += 1;
            }
        }
        let total: usize = support.values().sum();
        if total == 0 {
            return self.solution.policy_lookup(&self.mdp, mean);
        }
        let mut candidates: Vec<u32> = {
            let first = *support.keys().next().expect("non-empty support");
            lattice.action_levels(first).to_vec()
        };
        for &n in support.keys() {
            let levels = lattice.action_levels(n);
            candidates.retain(|l| levels.contains(l));
        }
        if candidates.is_empty() {
            return self.solution.policy_lookup(&self.mdp, mean);
        }
        let z_bar = support
            .iter()
            .map(|(&n, &c)| c as f64 * lattice.position(n).z)
            .sum::<f64>()
            / total as f64;
        let mut best: Option<(f64, f64, u32)> = None;
        for &level in &candidates {
            let mut score = 0.0;
            for (&n, &count) in &support {
                let pos = lattice
                    .action_levels(n)
                    .iter()
                    .position(|&l| l == level)
                    .expect("candidate is in every list");
                score += (count as f64 / total as f64) * self.q.node(n)[pos];
            }
            let depth = lattice.action_depth(level);
            let better = match best {
                None => true,
                Some((bs, bd, _)) => {
                    let (d_new, d_old) = ((depth - z_bar).abs(), (bd - z_bar).abs());
                    score > bs || (score == bs && (d_new < d_old || (d_new == d_old && depth < bd)))
                }
            };
            if better {
                best = Some((score, depth, level));
            }
        }
        let (_, depth, _) = best.expect("non-empty candidates");
        match self.mdp.action_set(mean) {
            Ok(set) => Ok(set.clip(depth)),
            Err(_) => Ok(depth),
        }
    }
}

impl GuidancePolicy for QmdpPolicy {
    fn kind(&self) -> PolicyKind {
        PolicyKind::Qmdp {
            sigma: self.sigma,
            samples: self.samples,
        }
    }

    fn action(&self, belief: &Belief, rng: &mut dyn RngCore) -> Result<f64> {
        let samples = self.sample_belief(belief, rng);
        if samples.is_empty() {
            let m = belief.mean;
            return Err(Error::NotNavigable { x: m.x, y: m.y, z: m.z });
        }
        self.action_for_samples(belief.mean, &samples)
    }
}
