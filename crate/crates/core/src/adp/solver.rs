use rayon::prelude::*;

use super::lattice::{LatticeSpec, NodeStatus};
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::mdp::{CavityMdp, StepOutcome};

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tolerance: 1.0,
            max_iters: 5000,
        }
    }
}

impl SolveOptions {
    /// Tolerance tied to the reward scale of `mdp`.
    pub fn for_mdp(mdp: &CavityMdp) -> Self {
        let scale = mdp
            .terminals()
            .iter()
            .map(|r| r.reward.abs())
            .fold(0.0, f64::max);
        Self {
            tolerance: if scale > 0.0 { 1e-4 * scale } else { 1e-4 },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::config(format!("tolerance {} must be positive", self.tolerance)));
        }
        if self.max_iters == 0 {
            return Err(Error::config("max_iters must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueFunction {
    pub values: Vec<f64>,
    pub iterations: usize,
    /// Sup-norm change of every sweep.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl ValueFunction {
    pub fn residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// Per-node optimal target depth (NaN at excluded nodes) and its position in
/// the node's action list.
#[derive(Clone, Debug, PartialEq)]
pub struct Policy {
    pub depths: Vec<f64>,
    pub choice: Vec<Option<u32>>,
}

/// Q values of every node and action, in the lattice's action order.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    offsets: Vec<usize>,
    q: Vec<f64>,
}

impl QTable {
    pub fn node(&self, n: usize) -> &[f64] {
        &self.q[self.offsets[n]..self.offsets[n + 1]]
    }
}

/// Expected one-step return of one node and action:
/// `constant + sum(coefficient * V[vertex])`.
#[derive(Clone, Debug, Default, PartialEq)]
struct ActionKernel {
    constant: f64,
    terms: Vec<(u32, f64)>,
}

impl ActionKernel {
    fn eval(&self, v: &[f64]) -> f64 {
        let mut q = self.constant;
        for &(n, c) in &self.terms {
            q += c * v[n as usize];
        }
        q
    }
}

/// The Bellman operator of `mdp` on `lattice` with every sample successor
/// resolved to terminal rewards and interpolation weights.
#[derive(Clone, Debug)]
pub struct CompiledKernel {
    offsets: Vec<usize>,
    actions: Vec<ActionKernel>,
    fixed: Vec<Option<f64>>,
    gamma: f64,
}

impl CompiledKernel {
    pub fn build(mdp: &CavityMdp, lattice: &LatticeSpec) -> Result<Self> {
        let per_node: Vec<(Option<f64>, Vec<ActionKernel>)> = (0..lattice.len())
            .into_par_iter()
            .map(|n| compile_node(mdp, lattice, n))
            .collect::<Result<_>>()?;
        let mut offsets = Vec::with_capacity(per_node.len() + 1);
        let mut actions = Vec::new();
        let mut fixed = Vec::with_capacity(per_node.len());
        offsets.push(0);
        for (f, a) in per_node {
            fixed.push(f);
            actions.extend(a);
            offsets.push(actions.len());
        }
        Ok(Self {
            offsets,
            actions,
            fixed,
            gamma: mdp.config().gamma,
        })
    }

    fn node_actions(&self, n: usize) -> &[ActionKernel] {
        &self.actions[self.offsets[n]..self.offsets[n + 1]]
    }

    /// Backed-up value and best action position of node `n`.
    fn backup(&self, v: &[f64], n: usize) -> (f64, Option<u32>) {
        if let Some(value) = self.fixed[n] {
            let choice = (!self.node_actions(n).is_empty()).then_some(0);
            return (value, choice);
        }
        let mut best = (f64::NEG_INFINITY, None);
        for (a, k) in self.node_actions(n).iter().enumerate() {
            let q = k.eval(v);
            if q > best.0 || best.1.is_none() {
                best = (q, Some(a as u32));
            }
        }
        best
    }

    pub fn sweep(&self, v: &[f64], out: &mut [f64]) {
        out.par_iter_mut()
            .enumerate()
            .for_each(|(n, o)| *o = self.backup(v, n).0);
    }

    pub fn q_table(&self, v: &[f64]) -> QTable {
        let offsets = self.offsets.clone();
        let q = (0..self.fixed.len())
            .into_par_iter()
            .flat_map_iter(|n| {
                let fixed = self.fixed[n];
                self.node_actions(n)
                    .iter()
                    .map(move |k| fixed.unwrap_or_else(|| k.eval(v)))
            })
            .collect();
        QTable { offsets, q }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// Value of a non-backed-up node: terminal reward, infeasible value for a
/// node with no action, `None` for a free node.
fn fixed_value(mdp: &CavityMdp, lattice: &LatticeSpec, n: usize) -> Option<f64> {
    match lattice.status(n) {
        NodeStatus::Terminal(r) => Some(mdp.terminals()[r].reward),
        NodeStatus::Excluded(_) => Some(0.0),
        NodeStatus::Free if lattice.action_levels(n).is_empty() => Some(mdp.config().r_infeasible),
        NodeStatus::Free => None,
    }
}

fn compile_node(mdp: &CavityMdp, lattice: &LatticeSpec, n: usize) -> Result<(Option<f64>, Vec<ActionKernel>)> {
    let levels = lattice.action_levels(n);
    if let Some(v) = fixed_value(mdp, lattice, n) {
        return Ok((Some(v), vec![ActionKernel::default(); levels.len()]));
    }
    let s = lattice.position(n);
    let dist = mdp.distribution_at(s)?;
    let gamma = mdp.config().gamma;
    let scale = gamma / dist.len() as f64;
    let mut kernels = Vec::with_capacity(levels.len());
    for &level in levels {
        let a = lattice.action_depth(level);
        let mut terminal_sum = 0.0;
        let mut terms: Vec<(u32, f64)> = Vec::new();
        for v in dist.samples() {
            match mdp.step_unchecked(s, a, *v) {
                StepOutcome::Terminal { terminal, .. } => terminal_sum += mdp.terminal_reward(terminal),
                StepOutcome::Continue(next) => {
                    let w = lattice.interpolation_weights(next);
                    if w.is_empty() {
                        terminal_sum += mdp.config().r_infeasible;
                    }
                    for &(node, lambda) in w.iter() {
                        terms.push((node, scale * lambda));
                    }
                }
            }
        }
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(terms.len());
        for (node, c) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == node => last.1 += c,
                _ => merged.push((node, c)),
            }
        }
        kernels.push(ActionKernel {
            constant: mdp.reward(s, a) + scale * terminal_sum,
            terms: merged,
        });
    }
    Ok((None, kernels))
}

/// One Bellman backup of node `n` against `v`, evaluated sample by sample.
/// Returns the best value and its depth; ties go to the earlier action in the
/// lattice's preference order.
pub fn bellman_backup(mdp: &CavityMdp, lattice: &LatticeSpec, v: &[f64], n: usize) -> Result<(f64, Option<f64>)> {
    let levels = lattice.action_levels(n);
    let s = lattice.position(n);
    match lattice.status(n) {
        NodeStatus::Excluded(_) => return Err(Error::NotNavigable { x: s.x, y: s.y, z: s.z }),
        NodeStatus::Terminal(r) => {
            return Ok((mdp.terminals()[r].reward, levels.first().map(|&l| lattice.action_depth(l))));
        }
        NodeStatus::Free if levels.is_empty() => return Ok((mdp.config().r_infeasible, None)),
        NodeStatus::Free => {}
    }
    let dist = mdp.distribution_at(s)?;
    let gamma = mdp.config().gamma;
    let mut best: (f64, Option<f64>) = (f64::NEG_INFINITY, None);
    for &level in levels {
        let a = lattice.action_depth(level);
        let mut total = 0.0;
        for sample in dist.samples() {
            total += match mdp.step(s, a, *sample)? {
                StepOutcome::Terminal { terminal, .. } => mdp.terminal_reward(terminal),
                StepOutcome::Continue(next) => lattice
                    .interpolate_value(v, next)
                    .unwrap_or(mdp.config().r_infeasible),
            };
        }
        let q = mdp.reward(s, a) + gamma * total / dist.len() as f64;
        if q > best.0 || best.1.is_none() {
            best = (q, Some(a));
        }
    }
    Ok(best)
}

/// Initial values: terminal rewards at terminal nodes, the value of drifting
/// forever at free nodes.
pub fn initial_values(mdp: &CavityMdp, lattice: &LatticeSpec) -> Vec<f64> {
    let cfg = mdp.config();
    let drift = cfg.e_h / (1.0 - cfg.gamma);
    (0..lattice.len())
        .map(|n| fixed_value(mdp, lattice, n).unwrap_or(drift))
        .collect()
}

/// Synchronous value iteration on a compiled kernel, starting from `v0`.
pub fn iterate(kernel: &CompiledKernel, v0: Vec<f64>, opts: &SolveOptions) -> Result<ValueFunction> {
    opts.validate()?;
    let mut v = v0;
    let mut next = vec![0.0; v.len()];
    let mut residuals = Vec::new();
    let mut converged = false;
    for _ in 0..opts.max_iters {
        kernel.sweep(&v, &mut next);
        let mut residual = 0.0f64;
        for (n, (a, b)) in next.iter().zip(&v).enumerate() {
            if !a.is_finite() {
                return Err(Error::NonFinite { node: n });
            }
            residual = residual.max((a - b).abs());
        }
        std::mem::swap(&mut v, &mut next);
        residuals.push(residual);
        if residual <= opts.tolerance {
            converged = true;
            break;
        }
    }
    Ok(ValueFunction {
        values: v,
        iterations: residuals.len(),
        residuals,
        converged,
    })
}

/// Greedy policy with respect to `values`.
pub fn greedy_policy(kernel: &CompiledKernel, lattice: &LatticeSpec, values: &[f64]) -> Policy {
    let (depths, choice) = (0..lattice.len())
        .into_par_iter()
        .map(|n| {
            if !lattice.status(n).is_valid() {
                return (f64::NAN, None);
            }
            let (_, c) = kernel.backup(values, n);
            let depth = c.map_or(f64::NAN, |c| lattice.action_depth(lattice.action_levels(n)[c as usize]));
            (depth, c)
        })
        .unzip();
    Policy { depths, choice }
}

/// A solved lattice.
#[derive(Clone, Debug)]
pub struct Solution {
    pub lattice: LatticeSpec,
    pub value: ValueFunction,
    pub policy: Policy,
}

impl Solution {
    /// Policy depth at the nearest valid node, clipped to the action set of
    /// `s`.
    pub fn policy_lookup(&self, mdp: &CavityMdp, s: Point3) -> Result<f64> {
        let set = mdp.action_set(s)?;
        let node = self
            .lattice
            .nearest_valid_node(s)
            .ok_or(Error::NotNavigable { x: s.x, y: s.y, z: s.z })?;
        let depth = self.policy.depths[node];
        Ok(set.clip(if depth.is_nan() { s.z } else { depth }))
    }
}

/// Builds the lattice and solves it by value iteration.
pub fn value_iteration(mdp: &CavityMdp, lattice: LatticeSpec, opts: &SolveOptions) -> Result<Solution> {
    opts.validate()?;
    let kernel = CompiledKernel::build(mdp, &lattice)?;
    let value = iterate(&kernel, initial_values(mdp, &lattice), opts)?;
    let policy = greedy_policy(&kernel, &lattice, &value.values);
    Ok(Solution {
        lattice,
        value,
        policy,
    })
}
