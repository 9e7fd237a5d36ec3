use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::mdp::{CavityMdp, Terminal};

const PLANE_EPS: f64 = 1e-9;

/// Geometry of a uniform lattice: node `(i, j, k)` sits at
/// `(x0 + i*sx, y0 + j*sy, z0 - k*sz)`, index `i + nx*(j + ny*k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    pub origin: [f64; 3],
    pub stride: [f64; 3],
    pub dims: [usize; 3],
}

impl LatticeGeometry {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn coords(&self, n: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims;
        [n % nx, (n / nx) % ny, n / (nx * ny)]
    }

    pub fn level_z(&self, k: usize) -> f64 {
        self.origin[2] - k as f64 * self.stride[2]
    }

    pub fn position(&self, n: usize) -> Point3 {
        let [i, j, k] = self.coords(n);
        Point3::new(
            self.origin[0] + i as f64 * self.stride[0],
            self.origin[1] + j as f64 * self.stride[1],
            self.level_z(k),
        )
    }

    /// Stride-normalised lattice coordinates of a point.
    pub fn fractional(&self, p: Point3) -> [f64; 3] {
        [
            (p.x - self.origin[0]) / self.stride[0],
            (p.y - self.origin[1]) / self.stride[1],
            (self.origin[2] - p.z) / self.stride[2],
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    /// Horizontal location is not navigable.
    Dry,
    /// Outside the water column at its location.
    OutsideColumn,
    /// At or below the depth rating.
    BelowRating,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeStatus {
    Free,
    /// Valid node inside the terminal region with this index.
    Terminal(usize),
    Excluded(ExclusionReason),
}

impl NodeStatus {
    pub fn is_valid(self) -> bool {
        !matches!(self, NodeStatus::Excluded(_))
    }
}

/// The planning lattice: geometry, node status and per-node depth actions
/// discretised to lattice levels.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec {
    geometry: LatticeGeometry,
    status: Vec<NodeStatus>,
    /// Level indices per node, most preferred first: smallest depth change,
    /// then descent.
    actions: Vec<Vec<u32>>,
}

impl LatticeSpec {
    pub fn build(mdp: &CavityMdp, stride: [f64; 3]) -> Result<Self> {
        if stride.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::config(format!("lattice strides {stride:?} must be positive")));
        }
        let env = mdp.envelope();
        let [ex, ey] = env.dims();
        let (mut x, mut y, mut z) = ([f64::INFINITY, f64::NEG_INFINITY], [f64::INFINITY, f64::NEG_INFINITY], [f64::INFINITY, f64::NEG_INFINITY]);
        for j in 0..ey {
            for i in 0..ex {
                if let Some(c) = env.column(i, j) {
                    let cx = env.origin()[0] + i as f64 * env.spacing()[0];
                    let cy = env.origin()[1] + j as f64 * env.spacing()[1];
                    x = [x[0].min(cx), x[1].max(cx)];
                    y = [y[0].min(cy), y[1].max(cy)];
                    z = [z[0].min(c.floor.max(mdp.config().z_min)), z[1].max(c.ceiling)];
                }
            }
        }
        if !x[0].is_finite() {
            return Err(Error::config("the envelope has no navigable column"));
        }
        let count = |extent: f64, s: f64| (extent / s + PLANE_EPS).max(0.0).floor() as usize + 1;
        let geometry = LatticeGeometry {
            origin: [x[0], y[0], z[1]],
            stride,
            dims: [
                count(x[1] - x[0], stride[0]),
                count(y[1] - y[0], stride[1]),
                count(z[1] - z[0], stride[2]),
            ],
        };
        Self::with_geometry(mdp, geometry)
    }

    /// Lattice with a given geometry, node status and actions from `mdp`.
    pub fn with_geometry(mdp: &CavityMdp, geometry: LatticeGeometry) -> Result<Self> {
        let n = geometry.len();
        let [nx, ny, nz] = geometry.dims;
        let env = mdp.envelope();
        let z_min = mdp.config().z_min;
        let mut status = Vec::with_capacity(n);
        for node in 0..n {
            let p = geometry.position(node);
            let s = match env.column_at(p.x, p.y) {
                None => NodeStatus::Excluded(ExclusionReason::Dry),
                Some(c) if !c.contains(p.z) => NodeStatus::Excluded(ExclusionReason::OutsideColumn),
                Some(_) if p.z <= z_min => NodeStatus::Excluded(ExclusionReason::BelowRating),
                Some(_) => match mdp.classify(p) {
                    Some(Terminal::Region(r)) => NodeStatus::Terminal(r),
                    _ => NodeStatus::Free,
                },
            };
            status.push(s);
        }

        let mut best_column = 0;
        for j in 0..ny {
            for i in 0..nx {
                let valid = (0..nz)
                    .filter(|&k| status[geometry.index(i, j, k)].is_valid())
                    .count();
                best_column = best_column.max(valid);
            }
        }
        if best_column < 2 {
            return Err(Error::config(format!(
                "vertical stride {} m leaves fewer than two depth levels in every column",
                geometry.stride[2]
            )));
        }

        let mut actions = vec![Vec::new(); n];
        for (node, list) in actions.iter_mut().enumerate() {
            if !status[node].is_valid() {
                continue;
            }
            let p = geometry.position(node);
            let set = mdp.action_set(p)?;
            let [_, _, k] = geometry.coords(node);
            let reach = ((mdp.config().max_ascent() - mdp.config().max_descent()) / geometry.stride[2]).ceil() as usize + 1;
            let lo = k.saturating_sub(reach);
            let hi = (k + reach).min(nz - 1);
            let mut levels: Vec<u32> = (lo..=hi)
                .filter(|&l| set.contains(geometry.level_z(l)))
                .map(|l| l as u32)
                .collect();
            levels.sort_by_key(|&l| {
                let d = l as i64 - k as i64;
                (d.unsigned_abs(), d < 0)
            });
            *list = levels;
        }
        Ok(Self {
            geometry,
            status,
            actions,
        })
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geometry
    }

    pub fn len(&self) -> usize {
        self.status.len()
    }

    pub fn is_empty(&self) -> bool {
        self.status.is_empty()
    }

    pub fn status(&self, n: usize) -> NodeStatus {
        self.status[n]
    }

    pub fn statuses(&self) -> &[NodeStatus] {
        &self.status
    }

    pub fn position(&self, n: usize) -> Point3 {
        self.geometry.position(n)
    }

    /// Action level indices of node `n` in preference order.
    pub fn action_levels(&self, n: usize) -> &[u32] {
        &self.actions[n]
    }

    pub fn action_depth(&self, level: u32) -> f64 {
        self.geometry.level_z(level as usize)
    }

    pub fn valid_count(&self) -> usize {
        self.status.iter().filter(|s| s.is_valid()).count()
    }

    /// Axis bracket for inverse-distance interpolation: one index when the
    /// coordinate lies on a lattice plane, else the two neighbours.
    fn bracket(&self, f: f64, axis: usize) -> ([usize; 2], usize) {
        let n = self.geometry.dims[axis];
        let f = f.clamp(0.0, (n - 1) as f64);
        let r = f.round();
        if (f - r).abs() * self.geometry.stride[axis] < PLANE_EPS {
            return ([r as usize, 0], 1);
        }
        let lo = (f.floor() as usize).min(n - 2);
        ([lo, lo + 1], 2)
    }

    /// Inverse-distance weights of the valid vertices of the cell containing
    /// `p` (clamped onto the lattice hull), distances in stride units.
    pub fn interpolation_weights(&self, p: Point3) -> InterpWeights {
        let f = self.geometry.fractional(p);
        let fc: [f64; 3] = std::array::from_fn(|a| f[a].clamp(0.0, (self.geometry.dims[a] - 1) as f64));
        let (bx, cx) = self.bracket(f[0], 0);
        let (by, cy) = self.bracket(f[1], 1);
        let (bz, cz) = self.bracket(f[2], 2);
        let mut w = InterpWeights::default();
        for &k in &bz[..cz] {
            for &j in &by[..cy] {
                for &i in &bx[..cx] {
                    let node = self.geometry.index(i, j, k);
                    if !self.status[node].is_valid() {
                        continue;
                    }
                    let d = ((fc[0] - i as f64).powi(2) + (fc[1] - j as f64).powi(2) + (fc[2] - k as f64).powi(2)).sqrt();
                    w.entries[w.len] = (node as u32, d);
                    w.len += 1;
                }
            }
        }
        if w.len == 1 {
            w.entries[0].1 = 1.0;
            return w;
        }
        if let Some(hit) = w.entries[..w.len].iter().position(|e| e.1 == 0.0) {
            w.entries[0] = (w.entries[hit].0, 1.0);
            w.len = 1;
            return w;
        }
        let total: f64 = w.entries[..w.len].iter().map(|e| 1.0 / e.1).sum();
        for e in &mut w.entries[..w.len] {
            e.1 = (1.0 / e.1) / total;
        }
        w
    }

    /// Interpolated value at `p`, `None` when the containing cell has no
    /// valid vertex.
    pub fn interpolate_value(&self, values: &[f64], p: Point3) -> Option<f64> {
        let w = self.interpolation_weights(p);
        (!w.is_empty()).then(|| w.iter().map(|&(n, l)| l * values[n as usize]).sum())
    }

    /// Nearest valid node in stride-normalised distance, lowest index on
    /// ties; `None` beyond one cell diagonal.
    pub fn nearest_valid_node(&self, p: Point3) -> Option<usize> {
        let f = self.geometry.fractional(p);
        let range = |a: usize| {
            let n = self.geometry.dims[a] as i64;
            let lo = (f[a].floor() as i64 - 1).clamp(0, n - 1);
            let hi = (f[a].ceil() as i64 + 1).clamp(0, n - 1);
            lo as usize..=hi as usize
        };
        if f.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let limit = 3.0f64.sqrt() + 1e-12;
        let mut best: Option<(f64, usize)> = None;
        for k in range(2) {
            for j in range(1) {
                for i in range(0) {
                    let node = self.geometry.index(i, j, k);
                    if !self.status[node].is_valid() {
                        continue;
                    }
                    let d = ((f[0] - i as f64).powi(2) + (f[1] - j as f64).powi(2) + (f[2] - k as f64).powi(2)).sqrt();
                    if d <= limit && best.is_none_or(|(bd, bn)| d < bd || (d == bd && node < bn)) {
                        best = Some((d, node));
                    }
                }
            }
        }
        best.map(|(_, n)| n)
    }
}

/// Up to eight `(node, weight)` pairs summing to one.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct InterpWeights {
    entries: [(u32, f64); 8],
    len: usize,
}

impl InterpWeights {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, (u32, f64)> {
        self.entries[..self.len].iter()
    }
}
