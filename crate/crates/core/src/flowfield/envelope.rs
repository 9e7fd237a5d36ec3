use serde::{Deserialize, Serialize};

use super::grid::{Field4, GridSpec};
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Water column bounds at one horizontal location.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColumnBounds {
    /// Ice-draft elevation (top of the water column).
    pub ceiling: f64,
    /// Seafloor elevation (bottom of the water column).
    pub floor: f64,
}

impl ColumnBounds {
    pub fn thickness(&self) -> f64 {
        self.ceiling - self.floor
    }

    pub fn contains(&self, z: f64) -> bool {
        z >= self.floor && z <= self.ceiling
    }
}

/// Per-column water bounds on the cell-centre lattice, bilinearly
/// interpolated in x and y.
///
/// The horizontal domain is the cell-centre range, which truncates the raw
/// grid by half a cell on every side. A location is navigable only when all
/// column centres contributing to its bilinear stencil hold water.
#[derive(Clone, Debug, PartialEq)]
pub struct NavigableEnvelope {
    origin: [f64; 2],
    spacing: [f64; 2],
    dims: [usize; 2],
    columns: Vec<Option<ColumnBounds>>,
}

impl NavigableEnvelope {
    /// Builds an envelope from explicit column bounds, x-fastest.
    pub fn from_columns(
        origin: [f64; 2],
        spacing: [f64; 2],
        dims: [usize; 2],
        columns: Vec<Option<ColumnBounds>>,
    ) -> Result<Self> {
        if dims[0] < 2 || dims[1] < 2 {
            return Err(Error::config("envelope needs at least 2x2 columns"));
        }
        if !(spacing[0] > 0.0 && spacing[1] > 0.0) {
            return Err(Error::config("envelope spacing must be positive"));
        }
        if columns.len() != dims[0] * dims[1] {
            return Err(Error::config(format!(
                "{} columns for a {}x{} envelope",
                columns.len(),
                dims[0],
                dims[1]
            )));
        }
        for c in columns.iter().flatten() {
            if !(c.floor < c.ceiling && c.ceiling <= 0.0) {
                return Err(Error::config(format!(
                    "column with floor {} and ceiling {} is inconsistent",
                    c.floor, c.ceiling
                )));
            }
        }
        Ok(Self {
            origin,
            spacing,
            dims,
            columns,
        })
    }

    /// Derives column bounds from per-cell wet fractions.
    pub fn from_wet_fractions(spec: &GridSpec, wet: &Field4) -> Self {
        let mut columns = Vec::with_capacity(spec.nx * spec.ny);
        let mut fractions = vec![0.0; spec.nz];
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                for (k, f) in fractions.iter_mut().enumerate() {
                    *f = wet.get(i, j, k, 0) as f64;
                }
                columns.push(column_from_fractions(spec.z0(), spec.dz, &fractions));
            }
        }
        Self {
            origin: [spec.x0(), spec.y0()],
            spacing: [spec.dx, spec.dy],
            dims: [spec.nx, spec.ny],
            columns,
        }
    }

    pub fn dims(&self) -> [usize; 2] {
        self.dims
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    /// Horizontal bounds `([x_lo, x_hi], [y_lo, y_hi])`.
    pub fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        (
            [
                self.origin[0],
                self.origin[0] + (self.dims[0] - 1) as f64 * self.spacing[0],
            ],
            [
                self.origin[1],
                self.origin[1] + (self.dims[1] - 1) as f64 * self.spacing[1],
            ],
        )
    }

    pub fn column(&self, i: usize, j: usize) -> Option<ColumnBounds> {
        self.columns[i + self.dims[0] * j]
    }

    pub fn columns(&self) -> &[Option<ColumnBounds>] {
        &self.columns
    }

    /// Highest ceiling and lowest floor over all wet columns.
    pub fn vertical_extent(&self) -> Option<(f64, f64)> {
        self.columns.iter().flatten().fold(None, |acc, c| match acc {
            None => Some((c.ceiling, c.floor)),
            Some((top, bottom)) => Some((top.max(c.ceiling), bottom.min(c.floor))),
        })
    }

    /// Column bounds at an arbitrary horizontal location, or `None` when the
    /// location is outside the truncated bounds or not navigable.
    pub fn column_at(&self, x: f64, y: f64) -> Option<ColumnBounds> {
        let fx = (x - self.origin[0]) / self.spacing[0];
        let fy = (y - self.origin[1]) / self.spacing[1];
        let (nx, ny) = (self.dims[0] as f64, self.dims[1] as f64);
        if !(fx >= 0.0 && fx <= nx - 1.0 && fy >= 0.0 && fy <= ny - 1.0) {
            return None;
        }
        let i0 = (fx.floor() as usize).min(self.dims[0] - 2);
        let j0 = (fy.floor() as usize).min(self.dims[1] - 2);
        let (ax, ay) = (fx - i0 as f64, fy - j0 as f64);
        let mut ceiling = 0.0;
        let mut floor = 0.0;
        for (di, dj, w) in [
            (0, 0, (1.0 - ax) * (1.0 - ay)),
            (1, 0, ax * (1.0 - ay)),
            (0, 1, (1.0 - ax) * ay),
            (1, 1, ax * ay),
        ] {
            if w == 0.0 {
                continue;
            }
            let c = self.column(i0 + di, j0 + dj)?;
            ceiling += w * c.ceiling;
            floor += w * c.floor;
        }
        (floor < ceiling).then_some(ColumnBounds { ceiling, floor })
    }

    /// True when `p` lies within the water column at its location.
    pub fn contains(&self, p: Point3) -> bool {
        self.column_at(p.x, p.y).is_some_and(|c| c.contains(p.z))
    }
}

/// Water column bounds of one grid column from its wet fractions (k = 0 on
/// top).
///
/// Cells between the topmost and bottommost wet cells count as water. A
/// partially wet top cell holds its water against its lower face, a partially
/// wet bottom cell against its upper face; a lone wet cell is centred.
pub fn column_from_fractions(z0: f64, dz: f64, fractions: &[f64]) -> Option<ColumnBounds> {
    let top = fractions.iter().position(|&f| f > 0.0)?;
    let bottom = fractions.iter().rposition(|&f| f > 0.0)?;
    let center = |k: usize| z0 - k as f64 * dz;
    let bounds = if top == bottom {
        let half = 0.5 * fractions[top] * dz;
        ColumnBounds {
            ceiling: center(top) + half,
            floor: center(top) - half,
        }
    } else {
        ColumnBounds {
            ceiling: center(top) - 0.5 * dz + fractions[top] * dz,
            floor: center(bottom) + 0.5 * dz - fractions[bottom] * dz,
        }
    };
    Some(bounds)
}
