//! Scenario files: decision-process settings, terminal regions, the start
//! location and an optional grid reference.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flowfield::{CavityParams, FlowGrid};
use crate::geometry::Point3;
use crate::mdp::{CavityMdp, MdpConfig, TerminalRegion};

pub const GROUNDING_ZONE: &str = "grounding_zone";
pub const SWEPT_TO_SEA: &str = "swept_to_sea";

/// Where the flow grid of a scenario comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GridRef {
    /// Grid archive directory, relative paths resolved against the scenario
    /// file.
    Archive(PathBuf),
    Synthetic { params: CavityParams, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub config: MdpConfig,
    pub terminals: Vec<TerminalRegion>,
    pub start: Point3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridRef>,
}

impl Scenario {
    /// Grounding zone across the far end of a synthetic cavity, a zero-reward
    /// sink past the inlet and a start a few kilometres inside the inlet.
    pub fn synthetic(params: &CavityParams) -> Self {
        let (w, dx) = (params.width_m, params.dx);
        let x_far = params.length_m + 10.0 * dx;
        let gz_x = params.grounding_x - 3000.0;
        let sea_x = params.inlet_x + 1000.0;
        let gz = TerminalRegion::rectangle(GROUNDING_ZONE, 10_000.0, [gz_x, x_far], [-w, 2.0 * w]);
        let sea = TerminalRegion::rectangle(
            SWEPT_TO_SEA,
            0.0,
            [params.inlet_x - 10.0 * dx - params.length_m, sea_x],
            [-w, 2.0 * w],
        );
        let start_x = params.inlet_x + 3000.0;
        let col = params.column(start_x, 0.5 * w);
        let start_z = col.map_or(-0.5 * params.depth_m, |c| c.ceiling - 0.75 * c.thickness());
        Self {
            config: MdpConfig::default(),
            terminals: vec![gz, sea],
            start: Point3::new(start_x, 0.5 * w, start_z.round()),
            grid: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut scenario: Scenario = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        if let Some(GridRef::Archive(dir)) = &mut scenario.grid {
            if dir.is_relative() {
                if let Some(parent) = path.parent() {
                    *dir = parent.join(&*dir);
                }
            }
        }
        Ok(scenario)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn build_mdp(&self, grid: Arc<FlowGrid>, subsample: f64) -> Result<CavityMdp> {
        CavityMdp::from_grid(grid, subsample, self.terminals.clone(), self.config.clone())
    }

    /// Label of the success region.
    pub fn goal_label(&self) -> &str {
        self.terminals
            .iter()
            .find(|r| r.label == GROUNDING_ZONE)
            .or_else(|| self.terminals.iter().max_by(|a, b| a.reward.total_cmp(&b.reward)))
            .map_or(GROUNDING_ZONE, |r| r.label.as_str())
    }
}
