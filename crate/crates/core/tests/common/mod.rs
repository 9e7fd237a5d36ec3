#![allow(dead_code)]

pub mod oracle;

use std::sync::Arc;

use icecav::flowfield::{
    ColumnBounds, Component, EmpiricalVelocityDistribution, Field4, FlowGrid, GridSpec, NavigableEnvelope,
};
use icecav::mdp::{CavityMdp, FnVelocityModel, MdpConfig, TerminalRegion};
use icecav::{Error, Point3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Box-shaped toy problem: an `nx x ny x nz` lattice in a uniform water
/// column under a flat ceiling at z = 0, a goal band at large x, and a velocity sample list per node.
#[derive(Clone, Debug)]
pub struct ToySpec {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub z_top: f64,
    pub delta: f64,
    pub gamma: f64,
    pub e_h: f64,
    pub alpha_b: f64,
    pub r_infeasible: f64,
    pub max_descent: f64,
    pub max_ascent: f64,
    pub goal_x: f64,
    pub goal_reward: f64,
    pub samples: Vec<Vec<[f64; 3]>>,
}

impl ToySpec {
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    pub fn position(&self, n: usize) -> [f64; 3] {
        let (i, j, k) = (n % self.nx, (n / self.nx) % self.ny, n / (self.nx * self.ny));
        [i as f64 * self.sx, j as f64 * self.sy, self.z_top - k as f64 * self.sz]
    }

    pub fn is_goal_node(&self, n: usize) -> bool {
        self.position(n)[0] >= self.goal_x
    }

    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nx = rng.random_range(4..=8);
        let ny = rng.random_range(3..=5);
        let nz = rng.random_range(3..=5);
        let (sx, sy, sz) = (1000.0, 800.0, 25.0);
        let delta = 1000.0;
        let n = nx * ny * nz;
        let samples = (0..n)
            .map(|_| {
                let m = rng.random_range(1..=8);
                let drift: f64 = rng.random_range(0.0..0.8);
                (0..m)
                    .map(|_| {
                        [
                            drift + rng.random_range(-0.6..0.9),
                            rng.random_range(-0.7..0.7),
                            rng.random_range(-0.01..0.01),
                        ]
                    })
                    .collect()
            })
            .collect();
        Self {
            nx,
            ny,
            nz,
            sx,
            sy,
            sz,
            z_top: 0.0,
            delta,
            gamma: 0.9,
            e_h: -rng.random_range(0.0..2.0),
            alpha_b: -rng.random_range(0.0..0.1),
            r_infeasible: -rng.random_range(1.0..50.0),
            max_descent: -(rng.random_range(1..=3) as f64 + 0.5) * sz,
            max_ascent: (rng.random_range(0..=2) as f64 + 0.5) * sz,
            goal_x: (nx as f64 - 1.5) * sx,
            goal_reward: rng.random_range(10.0..100.0),
            samples,
        }
    }

    pub fn envelope(&self) -> NavigableEnvelope {
        let col = ColumnBounds {
            ceiling: self.z_top,
            floor: self.z_top - (self.nz as f64 - 0.5) * self.sz,
        };
        NavigableEnvelope::from_columns([0.0, 0.0], [self.sx, self.sy], [self.nx, self.ny], vec![Some(col); self.nx * self.ny])
            .unwrap()
    }

    pub fn config(&self) -> MdpConfig {
        MdpConfig {
            delta: self.delta,
            z_min: -1e5,
            ascent_rate_max: self.max_ascent / self.delta,
            descent_rate_min: self.max_descent / self.delta,
            gamma: self.gamma,
            e_h: self.e_h,
            alpha_b: self.alpha_b,
            r_infeasible: self.r_infeasible,
        }
    }

    pub fn goal(&self) -> TerminalRegion {
        let big = 1e7;
        TerminalRegion::rectangle("grounding_zone", self.goal_reward, [self.goal_x, big], [-big, big])
    }

    pub fn mdp(&self) -> CavityMdp {
        let spec = self.clone();
        let model = FnVelocityModel(move |p: Point3| {
            let i = (p.x / spec.sx).round();
            let j = (p.y / spec.sy).round();
            let k = ((spec.z_top - p.z) / spec.sz).round();
            let on_node = (p.x - i * spec.sx).abs() < 1e-6
                && (p.y - j * spec.sy).abs() < 1e-6
                && (spec.z_top - k * spec.sz - p.z).abs() < 1e-6;
            if !on_node || i < 0.0 || j < 0.0 || k < 0.0 {
                return Err(Error::NotNavigable { x: p.x, y: p.y, z: p.z });
            }
            let n = spec.index(i as usize, j as usize, k as usize);
            EmpiricalVelocityDistribution::new(spec.samples[n].clone())
        });
        CavityMdp::new(self.envelope(), Arc::new(model), vec![self.goal()], self.config()).unwrap()
    }

    pub fn stride(&self) -> [f64; 3] {
        [self.sx, self.sy, self.sz]
    }
}

/// Fully wet grid with spatially uniform velocity `f(t)` in every snapshot.
pub fn uniform_grid(dims: [usize; 4], spacing: [f64; 4], f: impl Fn(usize) -> [f32; 3]) -> FlowGrid {
    let [nx, ny, nz, nt] = dims;
    let spec = GridSpec {
        nx,
        ny,
        nz,
        nt,
        dx: spacing[0],
        dy: spacing[1],
        dz: spacing[2],
        dt: spacing[3],
        origin: [0.0, 0.0, -0.5 * spacing[2], 0.0],
    };
    let field = |c: Component| {
        let mut fld = Field4::zeros(spec.shape(c.stagger()));
        let [a, b, d, _] = fld.dims();
        for n in 0..nt {
            let v = f(n)[c as usize];
            for k in 0..d {
                for j in 0..b {
                    for i in 0..a {
                        fld.set(i, j, k, n, v);
                    }
                }
            }
        }
        fld
    };
    let mut wet = Field4::zeros([nx, ny, nz, 1]);
    wet.as_mut_slice().fill(1.0);
    FlowGrid::new(spec.clone(), field(Component::U), field(Component::V), field(Component::W), wet).unwrap()
}

/// Small synthetic cavity that synthesises in well under a second.
pub fn small_cavity() -> icecav::flowfield::CavityParams {
    icecav::flowfield::CavityParams {
        length_m: 8000.0,
        width_m: 4000.0,
        depth_m: 600.0,
        dx: 500.0,
        dy: 500.0,
        dz: 20.0,
        nt: 48,
        grounding_x: 8000.0,
        sill_x: 3000.0,
        sill_width: 500.0,
        sill_gap_y: 2000.0,
        sill_gap_width: 800.0,
        diversion_x: 5000.0,
        eddy_wavelength_m: 3000.0,
        wall_rise: 600.0,
        ..Default::default()
    }
}

/// Shared grid of [`small_cavity`] with seed 1.
pub fn small_grid() -> Arc<FlowGrid> {
    static GRID: std::sync::OnceLock<Arc<FlowGrid>> = std::sync::OnceLock::new();
    GRID.get_or_init(|| Arc::new(icecav::flowfield::synthesize_cavity(&small_cavity(), 1).unwrap()))
        .clone()
}

pub fn small_scenario() -> icecav::scenario::Scenario {
    icecav::scenario::Scenario::synthetic(&small_cavity())
}

pub fn small_mdp(subsample: f64) -> CavityMdp {
    small_scenario().build_mdp(small_grid(), subsample).unwrap()
}
