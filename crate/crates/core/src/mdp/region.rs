use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;

/// End region with a lump reward, e.g. the grounding zone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminalRegion {
    pub label: String,
    pub reward: f64,
    /// Horizontal footprint, vertices in order.
    pub polygon: Vec<[f64; 2]>,
    /// Optional `[z_lo, z_hi]` elevation band.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_range: Option<[f64; 2]>,
}

impl TerminalRegion {
    pub fn new(label: impl Into<String>, reward: f64, polygon: Vec<[f64; 2]>) -> Self {
        Self {
            label: label.into(),
            reward,
            polygon,
            z_range: None,
        }
    }

    /// Axis-aligned rectangle footprint.
    pub fn rectangle(label: impl Into<String>, reward: f64, x: [f64; 2], y: [f64; 2]) -> Self {
        Self::new(
            label,
            reward,
            vec![[x[0], y[0]], [x[1], y[0]], [x[1], y[1]], [x[0], y[1]]],
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.label.is_empty() {
            return Err(Error::config("terminal region label is empty"));
        }
        if !self.reward.is_finite() {
            return Err(Error::config(format!("region {:?} has a non-finite reward", self.label)));
        }
        if self.polygon.len() < 3 || self.polygon.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::config(format!(
                "region {:?} needs at least three finite vertices",
                self.label
            )));
        }
        if self.area().abs() <= 0.0 {
            return Err(Error::config(format!("region {:?} has a degenerate footprint", self.label)));
        }
        if let Some([lo, hi]) = self.z_range {
            if !(lo < hi) {
                return Err(Error::config(format!("region {:?} has an empty z range", self.label)));
            }
        }
        Ok(())
    }

    /// Signed shoelace area of the footprint.
    pub fn area(&self) -> f64 {
        let n = self.polygon.len();
        0.5 * (0..n)
            .map(|i| {
                let [x0, y0] = self.polygon[i];
                let [x1, y1] = self.polygon[(i + 1) % n];
                x0 * y1 - x1 * y0
            })
            .sum::<f64>()
    }

    pub fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        let mut x = [f64::INFINITY, f64::NEG_INFINITY];
        let mut y = [f64::INFINITY, f64::NEG_INFINITY];
        for &[px, py] in &self.polygon {
            x = [x[0].min(px), x[1].max(px)];
            y = [y[0].min(py), y[1].max(py)];
        }
        (x, y)
    }

    pub fn contains(&self, p: Point3) -> bool {
        if let Some([lo, hi]) = self.z_range {
            if !(p.z >= lo && p.z <= hi) {
                return false;
            }
        }
        point_in_polygon(&self.polygon, p.x, p.y)
    }
}

/// Even-odd crossing test.
pub fn point_in_polygon(poly: &[[f64; 2]], x: f64, y: f64) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let [xi, yi] = poly[i];
        let [xj, yj] = poly[j];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}
