use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use super::config::MdpConfig;
use super::region::TerminalRegion;
use crate::error::{Error, Result};
use crate::flowfield::{
    subsample_stride, velocity_distribution_at, ColumnBounds, EmpiricalVelocityDistribution,
    FlowGrid, NavigableEnvelope,
};
use crate::geometry::Point3;

/// Label of the implicit terminal reached by leaving navigable water.
pub const INFEASIBLE_LABEL: &str = "infeasible";

/// Source of the planner's velocity distribution at a state.
pub trait VelocityModel: Send + Sync {
    fn distribution_at(&self, p: Point3) -> Result<EmpiricalVelocityDistribution>;
}

/// Distributions read from a flow grid over a strided subset of snapshots.
#[derive(Clone)]
pub struct GridVelocityModel {
    grid: Arc<FlowGrid>,
    subsample: f64,
}

impl GridVelocityModel {
    pub fn new(grid: Arc<FlowGrid>, subsample: f64) -> Result<Self> {
        subsample_stride(subsample)?;
        Ok(Self { grid, subsample })
    }

    pub fn grid(&self) -> &Arc<FlowGrid> {
        &self.grid
    }

    pub fn subsample(&self) -> f64 {
        self.subsample
    }
}

impl VelocityModel for GridVelocityModel {
    fn distribution_at(&self, p: Point3) -> Result<EmpiricalVelocityDistribution> {
        velocity_distribution_at(&self.grid, p, self.subsample)
    }
}

/// Distributions given by a closure.
pub struct FnVelocityModel<F>(pub F);

impl<F> VelocityModel for FnVelocityModel<F>
where
    F: Fn(Point3) -> Result<EmpiricalVelocityDistribution> + Send + Sync,
{
    fn distribution_at(&self, p: Point3) -> Result<EmpiricalVelocityDistribution> {
        (self.0)(p)
    }
}

/// Terminal outcome of a transition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Terminal {
    /// Index into [`CavityMdp::terminals`].
    Region(usize),
    Infeasible,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepOutcome {
    Continue(Point3),
    Terminal { terminal: Terminal, state: Point3 },
}

impl StepOutcome {
    pub fn state(&self) -> Point3 {
        match *self {
            StepOutcome::Continue(s) => s,
            StepOutcome::Terminal { state, .. } => state,
        }
    }

    pub fn terminal(&self) -> Option<Terminal> {
        match *self {
            StepOutcome::Continue(_) => None,
            StepOutcome::Terminal { terminal, .. } => Some(terminal),
        }
    }
}

/// Feasible target depths from a valid state: rate limits intersected with
/// the water column and the depth rating.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionSet {
    z: f64,
    min_change: f64,
    max_change: f64,
    column: ColumnBounds,
    z_min: f64,
}

impl ActionSet {
    pub fn contains(&self, a: f64) -> bool {
        let dz = a - self.z;
        dz >= self.min_change
            && dz < self.max_change
            && a >= self.column.floor
            && a <= self.column.ceiling
            && a > self.z_min
    }

    /// Lower end of the interval; closed unless set by the depth rating.
    pub fn lo(&self) -> f64 {
        (self.z + self.min_change).max(self.column.floor).max(self.z_min)
    }

    /// Upper end of the interval; open when set by the ascent rate.
    pub fn hi(&self) -> f64 {
        (self.z + self.max_change).min(self.column.ceiling)
    }

    /// Nearest feasible depth to `a`.
    pub fn clip(&self, a: f64) -> f64 {
        if self.contains(a) {
            return a;
        }
        let mut c = if a.is_nan() {
            self.z
        } else {
            a.clamp(self.lo(), self.hi())
        };
        let mut guard = 0;
        while !self.contains(c) {
            c = if c < self.z { c.next_up() } else { c.next_down() };
            guard += 1;
            if guard > 1 << 12 {
                return self.z;
            }
        }
        c
    }
}

impl fmt::Display for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open_lo = self.z_min >= (self.z + self.min_change).max(self.column.floor);
        let open_hi = self.z + self.max_change <= self.column.ceiling;
        write!(
            f,
            "{}{}, {}{}",
            if open_lo { '(' } else { '[' },
            self.lo(),
            self.hi(),
            if open_hi { ')' } else { ']' }
        )
    }
}

/// Depth-controlled drift in a cavity: valid states, depth actions, terminal
/// regions, the drift transition and energy rewards. Immutable once built.
#[derive(Clone)]
pub struct CavityMdp {
    envelope: NavigableEnvelope,
    model: Arc<dyn VelocityModel>,
    terminals: Vec<TerminalRegion>,
    config: MdpConfig,
}

impl fmt::Debug for CavityMdp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CavityMdp")
            .field("terminals", &self.terminals)
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl CavityMdp {
    pub fn new(
        envelope: NavigableEnvelope,
        model: Arc<dyn VelocityModel>,
        terminals: Vec<TerminalRegion>,
        config: MdpConfig,
    ) -> Result<Self> {
        config.validate()?;
        let mut labels = HashSet::new();
        let (bx, by) = envelope.bounds();
        for r in &terminals {
            r.validate()?;
            if r.label == INFEASIBLE_LABEL || r.label == "timeout" {
                return Err(Error::config(format!("region label {:?} is reserved", r.label)));
            }
            if !labels.insert(r.label.as_str()) {
                return Err(Error::config(format!("duplicate region label {:?}", r.label)));
            }
            let (rx, ry) = r.bbox();
            if rx[1] < bx[0] || rx[0] > bx[1] || ry[1] < by[0] || ry[0] > by[1] {
                return Err(Error::config(format!(
                    "region {:?} does not reach the navigable domain",
                    r.label
                )));
            }
        }
        Ok(Self {
            envelope,
            model,
            terminals,
            config,
        })
    }

    /// MDP over a flow grid, planning on a strided fraction of its snapshots.
    pub fn from_grid(
        grid: Arc<FlowGrid>,
        subsample: f64,
        terminals: Vec<TerminalRegion>,
        config: MdpConfig,
    ) -> Result<Self> {
        let envelope = grid.envelope().clone();
        let model = GridVelocityModel::new(grid, subsample)?;
        Self::new(envelope, Arc::new(model), terminals, config)
    }

    pub fn envelope(&self) -> &NavigableEnvelope {
        &self.envelope
    }

    pub fn terminals(&self) -> &[TerminalRegion] {
        &self.terminals
    }

    pub fn config(&self) -> &MdpConfig {
        &self.config
    }

    pub fn model(&self) -> &Arc<dyn VelocityModel> {
        &self.model
    }

    pub fn is_valid_state(&self, s: Point3) -> bool {
        s.z > self.config.z_min && self.envelope.contains(s)
    }

    fn valid_column(&self, s: Point3) -> Result<ColumnBounds> {
        match self.envelope.column_at(s.x, s.y) {
            Some(c) if c.contains(s.z) && s.z > self.config.z_min => Ok(c),
            _ => Err(Error::NotNavigable { x: s.x, y: s.y, z: s.z }),
        }
    }

    pub fn action_set(&self, s: Point3) -> Result<ActionSet> {
        let column = self.valid_column(s)?;
        Ok(ActionSet {
            z: s.z,
            min_change: self.config.max_descent(),
            max_change: self.config.max_ascent(),
            column,
            z_min: self.config.z_min,
        })
    }

    pub fn reward(&self, s: Point3, a: f64) -> f64 {
        self.config.e_h + self.config.alpha_b * (a - s.z).max(0.0)
    }

    /// First terminal region containing `s` in declaration order, else the
    /// infeasible terminal when `s` is not valid, else `None`.
    pub fn classify(&self, s: Point3) -> Option<Terminal> {
        if let Some(i) = self.terminals.iter().position(|r| r.contains(s)) {
            return Some(Terminal::Region(i));
        }
        (!self.is_valid_state(s)).then_some(Terminal::Infeasible)
    }

    pub fn terminal_reward(&self, t: Terminal) -> f64 {
        match t {
            Terminal::Region(i) => self.terminals[i].reward,
            Terminal::Infeasible => self.config.r_infeasible,
        }
    }

    pub fn terminal_label(&self, t: Terminal) -> &str {
        match t {
            Terminal::Region(i) => &self.terminals[i].label,
            Terminal::Infeasible => INFEASIBLE_LABEL,
        }
    }

    /// Drift for one planning step at velocity `v`, then settle at depth `a`.
    pub fn step(&self, s: Point3, a: f64, v: [f64; 3]) -> Result<StepOutcome> {
        let set = self.action_set(s)?;
        if !set.contains(a) {
            return Err(Error::InfeasibleAction {
                action: a,
                interval: set.to_string(),
            });
        }
        Ok(self.step_unchecked(s, a, v))
    }

    pub(crate) fn step_unchecked(&self, s: Point3, a: f64, v: [f64; 3]) -> StepOutcome {
        let next = Point3::new(s.x + v[0] * self.config.delta, s.y + v[1] * self.config.delta, a);
        match self.classify(next) {
            Some(terminal) => StepOutcome::Terminal {
                terminal,
                state: next,
            },
            None => StepOutcome::Continue(next),
        }
    }

    pub fn distribution_at(&self, s: Point3) -> Result<EmpiricalVelocityDistribution> {
        self.model.distribution_at(s)
    }

    /// Probability of landing exactly on `next` from `s` under depth `a`.
    pub fn transition_probability(&self, s: Point3, a: f64, next: Point3) -> Result<f64> {
        if next.z != a {
            return Ok(0.0);
        }
        let dist = self.distribution_at(s)?;
        let delta = self.config.delta;
        let hits = dist
            .samples()
            .iter()
            .filter(|v| s.x + v[0] * delta == next.x && s.y + v[1] * delta == next.y)
            .count();
        Ok(hits as f64 / dist.len() as f64)
    }
}
