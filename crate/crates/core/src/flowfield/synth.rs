//! Synthetic ice-shelf cavity flow.
//!
//! The cavity runs along +x from an open inlet to the grounding zone. The ice
//! draft deepens and the seafloor shoals toward the grounding zone, the floor
//! rises toward both lateral walls (which become dry), and an optional sill
//! crosses the trough. The mean circulation is an overturning cell in
//! terrain-following coordinates: inflow toward the grounding zone in the
//! lower water column, slowed in a bottom boundary layer, and outflow toward
//! the inlet under the ice. Past a
//! diversion line the deepest inflow veers toward the `y = 0` wall. Eddies are
//! a barotropic, horizontally non-divergent random field whose mode
//! amplitudes follow stationary AR(1) processes in time.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::envelope::ColumnBounds;
use super::grid::{Component, Field4, FlowGrid, GridSpec, Stagger};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CavityParams {
    pub length_m: f64,
    pub width_m: f64,
    pub depth_m: f64,
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
    pub dt: f64,
    pub nt: usize,
    /// Along-axis position of the open-ocean inlet.
    pub inlet_x: f64,
    /// Along-axis position of the grounding zone.
    pub grounding_x: f64,
    pub ice_draft_inlet: f64,
    pub ice_draft_grounding: f64,
    pub seafloor_inlet: f64,
    pub seafloor_grounding: f64,
    /// Seafloor rise at the lateral walls relative to the trough axis.
    pub wall_rise: f64,
    pub sill_x: f64,
    pub sill_width: f64,
    pub sill_height: f64,
    /// Lateral position of a gap through the sill.
    pub sill_gap_y: f64,
    pub sill_gap_width: f64,
    /// Fraction of the sill height removed at the centre of the gap.
    pub sill_gap_depth: f64,
    /// Peak horizontal speed of the mean circulation (m/s).
    pub mean_speed: f64,
    /// Normalised depth (0 = ice, 1 = floor) where the mean flow reverses.
    pub reversal_depth: f64,
    /// Along-axis position past which the deep inflow veers toward y = 0.
    pub diversion_x: f64,
    /// Veering angle of the deepest inflow past the diversion line.
    pub diversion_angle_deg: f64,
    /// Normalised depth above which the inflow starts to veer.
    pub diversion_depth: f64,
    /// Standard deviation of each horizontal eddy velocity component (m/s).
    pub eddy_amplitude: f64,
    pub eddy_correlation_s: f64,
    pub eddy_wavelength_m: f64,
    pub eddy_modes: usize,
}

impl Default for CavityParams {
    fn default() -> Self {
        Self {
            length_m: 40_000.0,
            width_m: 20_000.0,
            depth_m: 600.0,
            dx: 500.0,
            dy: 500.0,
            dz: 10.0,
            dt: 3600.0,
            nt: 720,
            inlet_x: 0.0,
            grounding_x: 40_000.0,
            ice_draft_inlet: -150.0,
            ice_draft_grounding: -420.0,
            seafloor_inlet: -580.0,
            seafloor_grounding: -500.0,
            wall_rise: 450.0,
            sill_x: 14_000.0,
            sill_width: 2_500.0,
            sill_height: 120.0,
            sill_gap_y: 12_000.0,
            sill_gap_width: 2_000.0,
            sill_gap_depth: 0.8,
            mean_speed: 0.05,
            reversal_depth: 0.4,
            diversion_x: 24_000.0,
            diversion_angle_deg: 35.0,
            diversion_depth: 0.65,
            eddy_amplitude: 0.01,
            eddy_correlation_s: 86_400.0,
            eddy_wavelength_m: 10_000.0,
            eddy_modes: 16,
        }
    }
}

impl CavityParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("length_m", self.length_m),
            ("width_m", self.width_m),
            ("depth_m", self.depth_m),
            ("dx", self.dx),
            ("dy", self.dy),
            ("dz", self.dz),
            ("dt", self.dt),
            ("sill_width", self.sill_width),
            ("sill_gap_width", self.sill_gap_width),
            ("eddy_wavelength_m", self.eddy_wavelength_m),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(format!("{name} = {v} must be positive")));
            }
        }
        let non_negative = [
            ("mean_speed", self.mean_speed),
            ("eddy_amplitude", self.eddy_amplitude),
            ("eddy_correlation_s", self.eddy_correlation_s),
            ("wall_rise", self.wall_rise),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(format!("{name} = {v} must be non-negative")));
            }
        }
        if self.nt < 2 {
            return Err(Error::config("nt must be at least 2"));
        }
        if self.eddy_modes < 2 {
            return Err(Error::config("eddy_modes must be at least 2"));
        }
        if !(self.grounding_x > self.inlet_x) {
            return Err(Error::config("grounding_x must lie beyond inlet_x"));
        }
        if !(0.0..=1.0).contains(&self.sill_gap_depth) {
            return Err(Error::config("sill_gap_depth must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.reversal_depth) || !(0.0..1.0).contains(&self.diversion_depth) {
            return Err(Error::config("reversal_depth and diversion_depth must lie in [0, 1)"));
        }
        for (name, z) in [
            ("ice_draft_inlet", self.ice_draft_inlet),
            ("ice_draft_grounding", self.ice_draft_grounding),
        ] {
            if !(z <= 0.0 && z > -self.depth_m) {
                return Err(Error::config(format!("{name} = {z} must lie in (-depth_m, 0]")));
            }
        }
        for (name, z) in [
            ("seafloor_inlet", self.seafloor_inlet),
            ("seafloor_grounding", self.seafloor_grounding),
        ] {
            if !(z >= -self.depth_m) {
                return Err(Error::config(format!("{name} = {z} is below the domain depth")));
            }
        }
        // The trough axis must hold water from inlet to grounding zone.
        let axis_y = 0.5 * self.width_m;
        let steps = 200;
        for s in 0..=steps {
            let x = self.inlet_x + (self.grounding_x - self.inlet_x) * s as f64 / steps as f64;
            let ceiling = self.ice_draft(x);
            let floor = self.seafloor(x, axis_y);
            if floor >= ceiling {
                return Err(Error::config(format!(
                    "seafloor {floor:.1} m is above the ice draft {ceiling:.1} m at x = {x:.0} m"
                )));
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            nx: (self.length_m / self.dx).round() as usize,
            ny: (self.width_m / self.dy).round() as usize,
            nz: (self.depth_m / self.dz).round() as usize,
            nt: self.nt,
            dx: self.dx,
            dy: self.dy,
            dz: self.dz,
            dt: self.dt,
            origin: [0.5 * self.dx, 0.5 * self.dy, -0.5 * self.dz, 0.0],
        }
    }

    fn along(&self, x: f64) -> f64 {
        ((x - self.inlet_x) / (self.grounding_x - self.inlet_x)).clamp(0.0, 1.0)
    }

    fn across(&self, y: f64) -> f64 {
        (2.0 * y / self.width_m - 1.0).clamp(-1.0, 1.0)
    }

    pub fn ice_draft(&self, x: f64) -> f64 {
        let s = self.along(x);
        self.ice_draft_inlet + (self.ice_draft_grounding - self.ice_draft_inlet) * s
    }

    pub fn seafloor(&self, x: f64, y: f64) -> f64 {
        let s = self.along(x);
        let eta = self.across(y);
        let trough = self.seafloor_inlet + (self.seafloor_grounding - self.seafloor_inlet) * s;
        let gap = 1.0 - self.sill_gap_depth * (-((y - self.sill_gap_y) / self.sill_gap_width).powi(2)).exp();
        let sill = self.sill_height
            * (-((x - self.sill_x) / self.sill_width).powi(2)).exp()
            * (1.0 - 0.5 * eta * eta)
            * gap;
        (trough + sill + self.wall_rise * eta.powi(4)).max(-self.depth_m)
    }

    /// Water column at `(x, y)`, `None` where ice meets the seafloor.
    pub fn column(&self, x: f64, y: f64) -> Option<ColumnBounds> {
        let ceiling = self.ice_draft(x);
        let floor = self.seafloor(x, y);
        (floor < ceiling).then_some(ColumnBounds { ceiling, floor })
    }

    /// Time-mean horizontal velocity at a point, zero outside the water.
    pub fn mean_velocity(&self, x: f64, y: f64, z: f64) -> [f64; 2] {
        let Some(col) = self.column(x, y) else {
            return [0.0; 2];
        };
        if !col.contains(z) {
            return [0.0; 2];
        }
        let sigma = (col.ceiling - z) / col.thickness();
        let r = self.reversal_depth;
        let layer = 2.0 * smoothstep(r - 0.1, r + 0.1, sigma) - 1.0;
        let friction = 1.0 - 0.6 * smoothstep(0.85, 1.0, sigma);
        let speed = 0.95 * self.mean_speed * (0.5 + 0.5 * sigma) * layer * friction;
        let eta = self.across(y);
        let walls = 1.0 - eta.powi(8);
        let d = self.diversion_depth;
        let veer = self.diversion_angle_deg.to_radians()
            * smoothstep(d - 0.03, d + 0.15, sigma)
            * smoothstep(self.diversion_x - 1000.0, self.diversion_x + 1000.0, x);
        [speed * walls * veer.cos(), -speed * walls * veer.sin()]
    }
}

fn smoothstep(lo: f64, hi: f64, v: f64) -> f64 {
    let t = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Random barotropic eddy field built from `M` plane-wave streamfunction
/// modes with evenly spread directions, so each velocity component has
/// variance `amplitude^2` at every point.
struct EddyModes {
    directions: Vec<(f64, f64)>,
    phases: Vec<f64>,
    wavenumber: f64,
}

impl EddyModes {
    fn new(p: &CavityParams, rng: &mut ChaCha8Rng) -> Self {
        let m = p.eddy_modes;
        let base: f64 = rng.random_range(0.0..PI);
        let directions = (0..m)
            .map(|i| {
                let th = base + PI * i as f64 / m as f64;
                (th.cos(), th.sin())
            })
            .collect();
        let phases = (0..m).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        Self {
            directions,
            phases,
            wavenumber: 2.0 * PI / p.eddy_wavelength_m,
        }
    }

    /// `(sin, cos)` of every mode phase at `(x, y)`.
    fn basis(&self, x: f64, y: f64) -> Vec<(f64, f64)> {
        self.directions
            .iter()
            .zip(&self.phases)
            .map(|(&(c, s), &ph)| (self.wavenumber * (c * x + s * y) + ph).sin_cos())
            .collect()
    }
}

/// Generates a synthetic cavity grid. Deterministic for a fixed seed.
pub fn synthesize_cavity(params: &CavityParams, seed: u64) -> Result<FlowGrid> {
    params.validate()?;
    let spec = params.grid_spec();
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = EddyModes::new(params, &mut rng);
    let m = params.eddy_modes;

    // Wet fractions from the analytic geometry at cell centres.
    let mut wet = Field4::zeros([spec.nx, spec.ny, spec.nz, 1]);
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let Some(col) = params.column(spec.x_center(i), spec.y_center(j)) else {
                continue;
            };
            for k in 0..spec.nz {
                let top = spec.z_center(k) + 0.5 * spec.dz;
                let bottom = top - spec.dz;
                let overlap = (top.min(col.ceiling) - bottom.max(col.floor)).max(0.0);
                wet.set(i, j, k, 0, (overlap / spec.dz).min(1.0) as f32);
            }
        }
    }

    // Time-invariant part of u and v, plus the eddy basis at each face column.
    let horizontal = [(Component::U, Stagger::XFace), (Component::V, Stagger::YFace)];
    let mut fields = Vec::new();
    for (c, stagger) in horizontal {
        let dims = spec.shape(stagger);
        let (ox, oy) = match stagger {
            Stagger::XFace => (spec.x0() - 0.5 * spec.dx, spec.y0()),
            _ => (spec.x0(), spec.y0() - 0.5 * spec.dy),
        };
        let [nx, ny, nz, nt] = dims;
        let mut mean = vec![0.0f64; nx * ny * nz];
        let mut in_water = vec![false; nx * ny * nz];
        let mut basis = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (x, y) = (ox + i as f64 * spec.dx, oy + j as f64 * spec.dy);
                basis.push(modes.basis(x, y));
                let col = params.column(x, y);
                for k in 0..nz {
                    let z = spec.z_center(k);
                    let idx = i + nx * (j + ny * k);
                    in_water[idx] = col.is_some_and(|col| col.contains(z));
                    let v = params.mean_velocity(x, y, z);
                    mean[idx] = if c == Component::U { v[0] } else { v[1] };
                }
            }
        }
        fields.push((c, Field4::zeros(dims), mean, in_water, basis, nt));
    }

    let rho = if params.eddy_correlation_s > 0.0 {
        (-params.dt / params.eddy_correlation_s).exp()
    } else {
        0.0
    };
    let innovation = (1.0 - rho * rho).sqrt();
    let mut coeffs: Vec<(f64, f64)> = (0..m)
        .map(|_| (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
        .collect();
    let scale = params.eddy_amplitude * (2.0 / m as f64).sqrt();
    let cap = 4.0 * params.eddy_amplitude;

    for n in 0..spec.nt {
        if n > 0 {
            for (a, b) in coeffs.iter_mut() {
                let ea: f64 = StandardNormal.sample(&mut rng);
                let eb: f64 = StandardNormal.sample(&mut rng);
                *a = rho * *a + innovation * ea;
                *b = rho * *b + innovation * eb;
            }
        }
        for (c, field, mean, in_water, basis, _) in fields.iter_mut() {
            let [nx, ny, nz, _] = field.dims();
            for j in 0..ny {
                for i in 0..nx {
                    let mut eddy = 0.0;
                    if scale > 0.0 {
                        for (mode, (&(a, b), &(sin, cos))) in coeffs.iter().zip(&basis[i + nx * j]).enumerate() {
                            let g = -a * sin + b * cos;
                            let (dc, ds) = modes.directions[mode];
                            // u = d(psi)/dy, v = -d(psi)/dx
                            eddy += if *c == Component::U { ds * g } else { -dc * g };
                        }
                        eddy = (scale * eddy).clamp(-cap, cap);
                    }
                    for k in 0..nz {
                        let idx = i + nx * (j + ny * k);
                        if in_water[idx] {
                            field.set(i, j, k, n, (mean[idx] + eddy) as f32);
                        }
                    }
                }
            }
        }
    }

    let mut it = fields.into_iter();
    let (_, u, ..) = it.next().expect("u field");
    let (_, v, ..) = it.next().expect("v field");
    let w = vertical_velocity(&spec, &u, &v, &wet, 0.3 * params.mean_speed);
    FlowGrid::new(spec, u, v, w, wet)
}

/// Vertical velocity on z-faces from discrete continuity, integrated upward
/// from a no-flux seafloor and limited to `cap` in magnitude.
fn vertical_velocity(spec: &GridSpec, u: &Field4, v: &Field4, wet: &Field4, cap: f64) -> Field4 {
    let mut w = Field4::zeros(spec.shape(Stagger::ZFace));
    for n in 0..spec.nt {
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                let mut below = 0.0f64;
                for k in (0..spec.nz).rev() {
                    let f = wet.get(i, j, k, 0) as f64;
                    if f > 0.0 {
                        let div = (u.get(i + 1, j, k, n) - u.get(i, j, k, n)) as f64 / spec.dx
                            + (v.get(i, j + 1, k, n) - v.get(i, j, k, n)) as f64 / spec.dy;
                        below -= div * f * spec.dz;
                        w.set(i, j, k, n, below.clamp(-cap, cap) as f32);
                    } else {
                        below = 0.0;
                    }
                }
            }
        }
    }
    w
}
