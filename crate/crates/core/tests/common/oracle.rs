//! Brute-force finite-horizon evaluation of a box-shaped toy problem, written
//! from the problem definition without using the solver.

use super::ToySpec;

fn axis_indices(f: f64, n: usize, stride: f64) -> Vec<usize> {
    let f = f.clamp(0.0, (n - 1) as f64);
    if (f - f.round()).abs() * stride < 1e-9 {
        return vec![f.round() as usize];
    }
    let lo = (f.floor() as usize).min(n - 2);
    vec![lo, lo + 1]
}

/// Inverse-distance interpolation of `v` at a point in stride units.
pub fn idw(spec: &ToySpec, v: &[f64], f: [f64; 3]) -> f64 {
    let ii = axis_indices(f[0], spec.nx, spec.sx);
    let jj = axis_indices(f[1], spec.ny, spec.sy);
    let kk = axis_indices(f[2], spec.nz, spec.sz);
    let fc = [
        f[0].clamp(0.0, (spec.nx - 1) as f64),
        f[1].clamp(0.0, (spec.ny - 1) as f64),
        f[2].clamp(0.0, (spec.nz - 1) as f64),
    ];
    let mut verts = Vec::new();
    for &k in &kk {
        for &j in &jj {
            for &i in &ii {
                let d = ((fc[0] - i as f64).powi(2) + (fc[1] - j as f64).powi(2) + (fc[2] - k as f64).powi(2)).sqrt();
                verts.push((spec.index(i, j, k), d));
            }
        }
    }
    if verts.len() == 1 {
        return v[verts[0].0];
    }
    let inv: f64 = verts.iter().map(|(_, d)| 1.0 / d).sum();
    verts.iter().map(|&(n, d)| v[n] / d).sum::<f64>() / inv
}

/// Value after `horizon` steps of backward induction from zero.
pub fn finite_horizon_values(spec: &ToySpec, horizon: usize) -> Vec<f64> {
    let n = spec.nx * spec.ny * spec.nz;
    let mut v: Vec<f64> = (0..n)
        .map(|node| if spec.is_goal_node(node) { spec.goal_reward } else { 0.0 })
        .collect();
    for _ in 0..horizon {
        let mut next = v.clone();
        for (node, out) in next.iter_mut().enumerate() {
            if spec.is_goal_node(node) {
                continue;
            }
            let [x, y, z] = spec.position(node);
            let mut best = f64::NEG_INFINITY;
            for l in 0..spec.nz {
                let a = spec.z_top - l as f64 * spec.sz;
                let dz = a - z;
                if !(dz >= spec.max_descent && dz < spec.max_ascent) {
                    continue;
                }
                let mut total = 0.0;
                let samples = &spec.samples[node];
                for vel in samples {
                    let (x2, y2) = (x + vel[0] * spec.delta, y + vel[1] * spec.delta);
                    total += if x2 >= spec.goal_x {
                        spec.goal_reward
                    } else if x2 < 0.0
                        || y2 < 0.0
                        || x2 > (spec.nx - 1) as f64 * spec.sx
                        || y2 > (spec.ny - 1) as f64 * spec.sy
                    {
                        spec.r_infeasible
                    } else {
                        idw(spec, &v, [x2 / spec.sx, y2 / spec.sy, (spec.z_top - a) / spec.sz])
                    };
                }
                let q = spec.e_h + spec.alpha_b * dz.max(0.0) + spec.gamma * total / samples.len() as f64;
                best = best.max(q);
            }
            *out = best;
        }
        v = next;
    }
    v
}
