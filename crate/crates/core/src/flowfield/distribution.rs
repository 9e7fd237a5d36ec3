use super::grid::FlowGrid;
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Equally weighted velocity samples `(v_x, v_y, v_z)` observed at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalVelocityDistribution {
    samples: Vec<[f64; 3]>,
}

impl EmpiricalVelocityDistribution {
    pub fn new(samples: Vec<[f64; 3]>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::config("velocity distribution needs at least one sample"));
        }
        if samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::config("velocity distribution has a non-finite sample"));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[[f64; 3]] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> [f64; 3] {
        let n = self.samples.len() as f64;
        let mut m = [0.0; 3];
        for s in &self.samples {
            for d in 0..3 {
                m[d] += s[d];
            }
        }
        m.map(|v| v / n)
    }

    /// Per-component population variance.
    pub fn variance(&self) -> [f64; 3] {
        let m = self.mean();
        let n = self.samples.len() as f64;
        let mut var = [0.0; 3];
        for s in &self.samples {
            for d in 0..3 {
                var[d] += (s[d] - m[d]).powi(2);
            }
        }
        var.map(|v| v / n)
    }
}

/// Time-step stride for a retained fraction of snapshots.
pub fn subsample_stride(subsample: f64) -> Result<usize> {
    if !(subsample > 0.0 && subsample <= 1.0) {
        return Err(Error::config(format!(
            "subsample fraction {subsample} must lie in (0, 1]"
        )));
    }
    Ok(((1.0 / subsample).round() as usize).max(1))
}

/// Snapshot indices retained for planning: `0, stride, 2*stride, ...`.
pub fn retained_steps(nt: usize, subsample: f64) -> Result<impl Iterator<Item = usize>> {
    Ok((0..nt).step_by(subsample_stride(subsample)?))
}

/// Empirical distribution of the modelled velocity at `p` over the retained
/// snapshots, one equally weighted sample per snapshot.
pub fn velocity_distribution_at(
    grid: &FlowGrid,
    p: Point3,
    subsample: f64,
) -> Result<EmpiricalVelocityDistribution> {
    if !grid.envelope().contains(p) {
        return Err(Error::NotNavigable { x: p.x, y: p.y, z: p.z });
    }
    let spec = grid.spec();
    let samples = retained_steps(spec.nt, subsample)?
        .map(|n| grid.interpolate_velocity(p, spec.time(n)))
        .collect::<Result<Vec<_>>>()?;
    EmpiricalVelocityDistribution::new(samples)
}
