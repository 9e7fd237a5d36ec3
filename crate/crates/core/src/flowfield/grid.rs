use serde::{Deserialize, Serialize};

use super::envelope::NavigableEnvelope;
use crate::error::{Axis, Error, Result};
use crate::geometry::Point3;

/// Geometry of a regular 4-D grid.
///
/// `origin` holds the centre of cell (0, 0, 0) and the first time stamp.
/// Cell centres sit at `x0 + i*dx`, `y0 + j*dy` and `z0 - k*dz` (the top
/// layer is k = 0), snapshots at `t0 + n*dt`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub nt: usize,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub dt: f64,
    pub origin: [f64; 4],
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("ny", self.ny), ("nz", self.nz), ("nt", self.nt)] {
            if n < 2 {
                return Err(Error::config(format!("{name} = {n}, need at least 2")));
            }
        }
        for (name, d) in [("dx", self.dx), ("dy", self.dy), ("dz", self.dz), ("dt", self.dt)] {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::config(format!("{name} = {d}, need a positive spacing")));
            }
        }
        if self.origin.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("grid origin must be finite"));
        }
        if self.z_top_face() > 1e-9 {
            return Err(Error::config(format!(
                "top cell face at z = {} lies above the sea surface",
                self.z_top_face()
            )));
        }
        Ok(())
    }

    pub fn x0(&self) -> f64 {
        self.origin[0]
    }
    pub fn y0(&self) -> f64 {
        self.origin[1]
    }
    pub fn z0(&self) -> f64 {
        self.origin[2]
    }
    pub fn t0(&self) -> f64 {
        self.origin[3]
    }

    pub fn x_center(&self, i: usize) -> f64 {
        self.x0() + i as f64 * self.dx
    }
    pub fn y_center(&self, j: usize) -> f64 {
        self.y0() + j as f64 * self.dy
    }
    pub fn z_center(&self, k: usize) -> f64 {
        self.z0() - k as f64 * self.dz
    }
    pub fn time(&self, n: usize) -> f64 {
        self.t0() + n as f64 * self.dt
    }
    pub fn t_end(&self) -> f64 {
        self.time(self.nt - 1)
    }

    pub fn z_top_face(&self) -> f64 {
        self.z0() + 0.5 * self.dz
    }
    pub fn z_bottom_face(&self) -> f64 {
        self.z0() - (self.nz as f64 - 0.5) * self.dz
    }

    pub fn cells(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    /// Horizontal extent of the cell-centre lattice, i.e. the raw grid
    /// truncated by half a cell on every side.
    pub fn truncated_bounds(&self) -> ([f64; 2], [f64; 2]) {
        (
            [self.x0(), self.x_center(self.nx - 1)],
            [self.y0(), self.y_center(self.ny - 1)],
        )
    }

    /// Array shape `[x, y, z, t]` of a variable with the given staggering.
    pub fn shape(&self, stagger: Stagger) -> [usize; 4] {
        let (sx, sy, sz) = stagger.extra();
        [self.nx + sx, self.ny + sy, self.nz + sz, self.nt]
    }
}

/// Where a variable lives within a cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stagger {
    Center,
    XFace,
    YFace,
    ZFace,
}

impl Stagger {
    fn extra(self) -> (usize, usize, usize) {
        match self {
            Stagger::Center => (0, 0, 0),
            Stagger::XFace => (1, 0, 0),
            Stagger::YFace => (0, 1, 0),
            Stagger::ZFace => (0, 0, 1),
        }
    }
}

/// Velocity component selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    U,
    V,
    W,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::U, Component::V, Component::W];

    pub fn stagger(self) -> Stagger {
        match self {
            Component::U => Stagger::XFace,
            Component::V => Stagger::YFace,
            Component::W => Stagger::ZFace,
        }
    }
}

/// Dense 4-D array stored x-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Field4 {
    dims: [usize; 4],
    data: Vec<f32>,
}

impl Field4 {
    pub fn zeros(dims: [usize; 4]) -> Self {
        Self {
            dims,
            data: vec![0.0; dims.iter().product()],
        }
    }

    pub fn from_vec(dims: [usize; 4], data: Vec<f32>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if data.len() != expected {
            return Err(Error::config(format!(
                "array of {} values does not match shape {dims:?}",
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize, n: usize) -> usize {
        let [nx, ny, nz, _] = self.dims;
        i + nx * (j + ny * (k + nz * n))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, n: usize) -> f32 {
        self.data[self.index(i, j, k, n)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, n: usize, v: f32) {
        let idx = self.index(i, j, k, n);
        self.data[idx] = v;
    }
}

/// One corner of an interpolation stencil: `[i, j, k, n]` and its weight.
pub type StencilEntry = ([usize; 4], f64);

/// Staggered time-varying velocity field plus per-cell wet fractions.
#[derive(Clone, Debug)]
pub struct FlowGrid {
    spec: GridSpec,
    u: Field4,
    v: Field4,
    w: Field4,
    /// `[nx, ny, nz, 1]`, cell-centred.
    wet: Field4,
    envelope: NavigableEnvelope,
}

impl FlowGrid {
    pub fn new(spec: GridSpec, u: Field4, v: Field4, w: Field4, wet: Field4) -> Result<Self> {
        spec.validate()?;
        for (name, field, stagger) in [
            ("u", &u, Stagger::XFace),
            ("v", &v, Stagger::YFace),
            ("w", &w, Stagger::ZFace),
        ] {
            let want = spec.shape(stagger);
            if field.dims() != want {
                return Err(Error::config(format!(
                    "{name} has shape {:?}, expected {want:?}",
                    field.dims()
                )));
            }
            if let Some(pos) = field.as_slice().iter().position(|v| !v.is_finite()) {
                return Err(Error::config(format!("{name} has a non-finite value at flat index {pos}")));
            }
        }
        let want = [spec.nx, spec.ny, spec.nz, 1];
        if wet.dims() != want {
            return Err(Error::config(format!(
                "wet fraction has shape {:?}, expected {want:?}",
                wet.dims()
            )));
        }
        if let Some(pos) = wet
            .as_slice()
            .iter()
            .position(|f| !(0.0..=1.0).contains(f))
        {
            return Err(Error::config(format!("wet fraction outside [0, 1] at flat index {pos}")));
        }
        let envelope = NavigableEnvelope::from_wet_fractions(&spec, &wet);
        Ok(Self {
            spec,
            u,
            v,
            w,
            wet,
            envelope,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn component(&self, c: Component) -> &Field4 {
        match c {
            Component::U => &self.u,
            Component::V => &self.v,
            Component::W => &self.w,
        }
    }

    pub fn wet_fraction(&self) -> &Field4 {
        &self.wet
    }

    pub fn wet_fraction_at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.wet.get(i, j, k, 0) as f64
    }

    /// Navigable envelope derived from the wet fractions at construction.
    pub fn envelope(&self) -> &NavigableEnvelope {
        &self.envelope
    }

    /// Position of sample `(i, j, k, n)` of a component.
    pub fn sample_position(&self, c: Component, i: usize, j: usize, k: usize, n: usize) -> (Point3, f64) {
        let s = &self.spec;
        let (ox, oy, oz) = stagger_offsets(s, c.stagger());
        (
            Point3::new(ox + i as f64 * s.dx, oy + j as f64 * s.dy, oz - k as f64 * s.dz),
            s.time(n),
        )
    }

    fn check_domain(&self, p: Point3, t: f64) -> Result<()> {
        let s = &self.spec;
        let ([x_lo, x_hi], [y_lo, y_hi]) = s.truncated_bounds();
        let checks = [
            (Axis::X, p.x, x_lo, x_hi),
            (Axis::Y, p.y, y_lo, y_hi),
            (Axis::Z, p.z, s.z_bottom_face(), s.z_top_face()),
            (Axis::T, t, s.t0(), s.t_end()),
        ];
        for (axis, value, lo, hi) in checks {
            if !(value >= lo && value <= hi) {
                return Err(Error::OutOfDomain { axis, value, lo, hi });
            }
        }
        Ok(())
    }

    /// The 16 samples and multilinear weights used to interpolate one
    /// component at `(p, t)`.
    pub fn stencil(&self, c: Component, p: Point3, t: f64) -> Result<[StencilEntry; 16]> {
        self.check_domain(p, t)?;
        let s = &self.spec;
        let dims = self.component(c).dims();
        let (ox, oy, oz) = stagger_offsets(s, c.stagger());
        let ax = [
            axis_bracket((p.x - ox) / s.dx, dims[0]),
            axis_bracket((p.y - oy) / s.dy, dims[1]),
            axis_bracket((oz - p.z) / s.dz, dims[2]),
            axis_bracket((t - s.t0()) / s.dt, dims[3]),
        ];
        let mut out = [([0usize; 4], 0.0); 16];
        for (corner, slot) in out.iter_mut().enumerate() {
            let mut idx = [0usize; 4];
            let mut weight = 1.0;
            for (d, &(lo, frac)) in ax.iter().enumerate() {
                if corner >> d & 1 == 1 {
                    idx[d] = lo + 1;
                    weight *= frac;
                } else {
                    idx[d] = lo;
                    weight *= 1.0 - frac;
                }
            }
            *slot = (idx, weight);
        }
        Ok(out)
    }

    /// Velocity `(u, v, w)` at `(p, t)`; each component is interpolated
    /// multilinearly on its own staggered lattice.
    pub fn interpolate_velocity(&self, p: Point3, t: f64) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (slot, c) in out.iter_mut().zip(Component::ALL) {
            let field = self.component(c);
            *slot = self
                .stencil(c, p, t)?
                .iter()
                .map(|&([i, j, k, n], w)| w * field.get(i, j, k, n) as f64)
                .sum();
        }
        Ok(out)
    }
}

fn stagger_offsets(s: &GridSpec, stagger: Stagger) -> (f64, f64, f64) {
    match stagger {
        Stagger::Center => (s.x0(), s.y0(), s.z0()),
        Stagger::XFace => (s.x0() - 0.5 * s.dx, s.y0(), s.z0()),
        Stagger::YFace => (s.x0(), s.y0() - 0.5 * s.dy, s.z0()),
        Stagger::ZFace => (s.x0(), s.y0(), s.z0() + 0.5 * s.dz),
    }
}

/// Lower bracket index and fractional weight for a fractional sample
/// coordinate, clamped into `[0, n - 1]`.
#[inline]
fn axis_bracket(f: f64, n: usize) -> (usize, f64) {
    let top = (n - 1) as f64;
    let f = f.clamp(0.0, top);
    let lo = (f.floor() as usize).min(n - 2);
    (lo, f - lo as f64)
}
