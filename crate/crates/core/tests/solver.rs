mod common;

use std::sync::Arc;

use common::{oracle, ToySpec};
use icecav::adp::{
    bellman_backup, initial_values, iterate, read_solution, value_iteration, write_solution, CompiledKernel,
    LatticeSpec, NodeStatus, SolveMeta, SolveOptions,
};
use icecav::flowfield::{ColumnBounds, EmpiricalVelocityDistribution, NavigableEnvelope};
use icecav::mdp::{CavityMdp, FnVelocityModel};
use icecav::Point3;
use proptest::prelude::*;

fn tight() -> SolveOptions {
    SolveOptions {
        tolerance: 1e-10,
        max_iters: 100_000,
    }
}

fn solve(spec: &ToySpec) -> (CavityMdp, icecav::adp::Solution) {
    let mdp = spec.mdp();
    let lattice = LatticeSpec::build(&mdp, spec.stride()).unwrap();
    let sol = value_iteration(&mdp, lattice, &tight()).unwrap();
    (mdp, sol)
}

/// Straight chain along x: every sample moves exactly one column.
fn chain(nx: usize) -> ToySpec {
    let mut spec = ToySpec::random(0);
    spec.nx = nx;
    spec.ny = 2;
    spec.nz = 2;
    spec.goal_x = (nx as f64 - 1.5) * spec.sx;
    spec.samples = vec![vec![[spec.sx / spec.delta, 0.0, 0.0]]; nx * 4];
    spec
}

#[test]
fn toy_lattice_matches_spec() {
    let spec = ToySpec::random(3);
    let mdp = spec.mdp();
    let lattice = LatticeSpec::build(&mdp, spec.stride()).unwrap();
    assert_eq!(lattice.geometry().dims, [spec.nx, spec.ny, spec.nz]);
    for n in 0..lattice.len() {
        let p = lattice.position(n);
        assert_eq!([p.x, p.y, p.z], spec.position(n));
        let want_terminal = spec.is_goal_node(n);
        assert_eq!(matches!(lattice.status(n), NodeStatus::Terminal(_)), want_terminal);
        assert!(lattice.status(n).is_valid());
    }
}

#[test]
fn random_problems_match_oracle() {
    for seed in 0..10 {
        let spec = ToySpec::random(seed);
        let (_, sol) = solve(&spec);
        assert!(sol.value.converged);
        let want = oracle::finite_horizon_values(&spec, 300);
        let err = sol
            .value
            .values
            .iter()
            .zip(&want)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "seed {seed}: sup error {err}");
    }
}

#[test]
fn chain_values_are_geometric() {
    let spec = chain(4);
    let (mdp, sol) = solve(&spec);
    let (g, e, r) = (spec.gamma, spec.e_h, spec.goal_reward);
    for k in 0..2 {
        for j in 0..2 {
            let at = |i: usize| sol.value.values[spec.index(i, j, k)];
            assert_eq!(at(3), r);
            assert!((at(2) - (e + g * r)).abs() < 1e-9);
            assert!((at(1) - (e + g * (e + g * r))).abs() < 1e-9);
            assert!((at(0) - (e + g * (e + g * (e + g * r)))).abs() < 1e-9);
        }
    }
    for n in 0..sol.lattice.len() {
        if matches!(sol.lattice.status(n), NodeStatus::Free) {
            assert_eq!(sol.policy.depths[n], sol.lattice.position(n).z, "ties keep the current depth");
        }
    }
    let s = Point3::new(0.0, 0.0, 0.0);
    assert_eq!(sol.policy_lookup(&mdp, s).unwrap(), 0.0);
}

#[test]
fn three_sample_backup_by_hand() {
    let mut spec = chain(4);
    spec.nz = 3;
    spec.samples = vec![vec![[0.0; 3]]; spec.nx * spec.ny * spec.nz];
    // From node (1, 0, 0): one sample reaches the goal, one leaves the domain,
    // one lands on node (2, 0, *).
    let origin = spec.index(1, 0, 0);
    spec.samples[origin] = vec![[2.0, 0.0, 0.0], [-1.5, 0.0, 0.0], [1.0, 0.0, 0.0]];
    let mdp = spec.mdp();
    let lattice = LatticeSpec::build(&mdp, spec.stride()).unwrap();
    let v: Vec<f64> = (0..lattice.len()).map(|n| 3.0 * n as f64 - 7.0).collect();
    let mut best = f64::NEG_INFINITY;
    for k in 0..spec.nz {
        let a = -(k as f64) * spec.sz;
        if a < spec.max_descent {
            continue;
        }
        let landing = v[spec.index(2, 0, k)];
        let q = spec.e_h + spec.gamma * (spec.goal_reward + spec.r_infeasible + landing) / 3.0;
        best = best.max(q);
    }
    let (got, _) = bellman_backup(&mdp, &lattice, &v, origin).unwrap();
    assert!((got - best).abs() < 1e-12, "{got} vs {best}");
    let kernel = CompiledKernel::build(&mdp, &lattice).unwrap();
    let q = kernel.q_table(&v);
    let top = q.node(origin).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!((top - best).abs() < 1e-12);
}

#[test]
fn compiled_kernel_matches_reference_backup() {
    for seed in 20..25 {
        let spec = ToySpec::random(seed);
        let mdp = spec.mdp();
        let lattice = LatticeSpec::build(&mdp, spec.stride()).unwrap();
        let kernel = CompiledKernel::build(&mdp, &lattice).unwrap();
        let v: Vec<f64> = (0..lattice.len()).map(|n| ((n * 37) % 11) as f64 - 5.0).collect();
        let mut out = vec![0.0; v.len()];
        kernel.sweep(&v, &mut out);
        for (n, got) in out.iter().enumerate() {
            let (want, _) = bellman_backup(&mdp, &lattice, &v, n).unwrap();
            assert!((got - want).abs() < 1e-9, "seed {seed} node {n}");
        }
    }
}

#[test]
fn idw_equidistant_pair() {
    let spec = ToySpec::random(1);
    let mdp = spec.mdp();
    let lattice = LatticeSpec::build(&mdp, spec.stride()).unwrap();
    let mut v = vec![0.0; lattice.len()];
    v[spec.index(0, 1, 1)] = 10.0;
    v[spec.index(1, 1, 1)] = 20.0;
    let p = Point3::new(0.5 * spec.sx, spec.sy, -spec.sz);
    assert_eq!(lattice.interpolation_weights(p).len(), 2);
    assert!((lattice.interpolate_value(&v, p).unwrap() - 15.0).abs() < 1e-12);
    let on_node = Point3::new(spec.sx, spec.sy, -spec.sz);
    assert_eq!(lattice.interpolate_value(&v, on_node), Some(20.0));
}

#[test]
fn idw_general_position_direct_formula() {
    let spec = ToySpec::random(2);
    let mdp = spec.mdp();
    let lattice = LatticeSpec::build(&mdp, spec.stride()).unwrap();
    let v: Vec<f64> = (0..lattice.len()).map(|n| (n as f64 * 0.7).sin() * 100.0).collect();
    let f = [0.3, 0.6, 0.25];
    let p = Point3::new(f[0] * spec.sx, f[1] * spec.sy, -f[2] * spec.sz);
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, j, k) in itertools(2) {
        let d = ((f[0] - i as f64).powi(2) + (f[1] - j as f64).powi(2) + (f[2] - k as f64).powi(2)).sqrt();
        num += v[spec.index(i, j, k)] / d;
        den += 1.0 / d;
    }
    assert!((lattice.interpolate_value(&v, p).unwrap() - num / den).abs() < 1e-9);
}

fn itertools(n: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (0..n).flat_map(move |k| (0..n).flat_map(move |j| (0..n).map(move |i| (i, j, k))))
}

/// Toy problem with the column at (0, 0) dry.
fn holed(spec: &ToySpec) -> CavityMdp {
    let col = ColumnBounds {
        ceiling: 0.0,
        floor: -(spec.nz as f64 - 0.5) * spec.sz,
    };
    let mut cols = vec![Some(col); spec.nx * spec.ny];
    cols[0] = None;
    let env = NavigableEnvelope::from_columns([0.0, 0.0], [spec.sx, spec.sy], [spec.nx, spec.ny], cols).unwrap();
    let model = FnVelocityModel(|_| EmpiricalVelocityDistribution::new(vec![[0.0; 3]]));
    CavityMdp::new(env, Arc::new(model), vec![spec.goal()], spec.config()).unwrap()
}

#[test]
fn idw_drops_invalid_vertices() {
    let spec = ToySpec::random(4);
    let mdp = holed(&spec);
    let lattice = LatticeSpec::build(&mdp, spec.stride()).unwrap();
    assert!(!lattice.status(spec.index(0, 0, 0)).is_valid());
    let v: Vec<f64> = (0..lattice.len()).map(|n| n as f64).collect();
    let f = [0.4, 0.3, 0.0];
    let p = Point3::new(f[0] * spec.sx, f[1] * spec.sy, 0.0);
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, j) in [(1, 0), (0, 1), (1, 1)] {
        let d = ((f[0] - i as f64).powi(2) + (f[1] - j as f64).powi(2)).sqrt();
        num += v[spec.index(i, j, 0)] / d;
        den += 1.0 / d;
    }
    let w = lattice.interpolation_weights(p);
    assert_eq!(w.len(), 3);
    assert!((lattice.interpolate_value(&v, p).unwrap() - num / den).abs() < 1e-9);
}

#[test]
fn solution_archive_round_trip() {
    let spec = ToySpec::random(5);
    let (mdp, sol) = solve(&spec);
    let dir = tempfile::tempdir().unwrap();
    let meta = SolveMeta::new(&sol, 1.0, 1e-10, 100_000);
    write_solution(dir.path(), &sol, &meta).unwrap();
    let (back, back_meta) = read_solution(dir.path(), &mdp).unwrap();
    assert_eq!(back.value.values, sol.value.values);
    assert_eq!(back.policy.choice, sol.policy.choice);
    assert_eq!(back_meta.iterations, sol.value.iterations);
    assert_eq!(back.lattice.geometry(), sol.lattice.geometry());
}

#[test]
fn iteration_cap_reports_non_convergence() {
    let spec = ToySpec::random(6);
    let mdp = spec.mdp();
    let lattice = LatticeSpec::build(&mdp, spec.stride()).unwrap();
    let opts = SolveOptions {
        tolerance: 1e-12,
        max_iters: 2,
    };
    let sol = value_iteration(&mdp, lattice, &opts).unwrap();
    assert!(!sol.value.converged);
    assert_eq!(sol.value.iterations, 2);
}

fn scaled(spec: &ToySpec, c: f64) -> ToySpec {
    let mut s = spec.clone();
    s.e_h *= c;
    s.alpha_b *= c;
    s.r_infeasible *= c;
    s.goal_reward *= c;
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reward_scaling_scales_values(seed in 0u64..1000, c in prop::sample::select(vec![0.25, 0.5, 2.0, 8.0])) {
        let spec = ToySpec::random(seed);
        let (_, a) = solve(&spec);
        let (_, b) = solve(&scaled(&spec, c));
        for (x, y) in a.value.values.iter().zip(&b.value.values) {
            prop_assert!((c * x - y).abs() <= 1e-7 * (1.0 + y.abs()));
        }
        prop_assert_eq!(&a.policy.choice, &b.policy.choice);
    }

    #[test]
    fn bellman_operator_contracts(seed in 0u64..1000, salt in 0u64..1000) {
        let spec = ToySpec::random(seed);
        let mdp = spec.mdp();
        let lattice = LatticeSpec::build(&mdp, spec.stride()).unwrap();
        let kernel = CompiledKernel::build(&mdp, &lattice).unwrap();
        let n = lattice.len();
        let v1: Vec<f64> = (0..n).map(|i| (((i as u64 + 1) * (salt + 7)) % 97) as f64 - 40.0).collect();
        let v2: Vec<f64> = (0..n).map(|i| (((i as u64 + 3) * (salt + 13)) % 89) as f64 - 30.0).collect();
        let (mut t1, mut t2) = (vec![0.0; n], vec![0.0; n]);
        kernel.sweep(&v1, &mut t1);
        kernel.sweep(&v2, &mut t2);
        let sup = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(sup(&t1, &t2) <= spec.gamma * sup(&v1, &v2) + 1e-9);
    }

    #[test]
    fn residuals_shrink_geometrically(seed in 0u64..1000) {
        let spec = ToySpec::random(seed);
        let mdp = spec.mdp();
        let lattice = LatticeSpec::build(&mdp, spec.stride()).unwrap();
        let kernel = CompiledKernel::build(&mdp, &lattice).unwrap();
        let vf = iterate(&kernel, initial_values(&mdp, &lattice), &tight()).unwrap();
        prop_assert!(vf.converged);
        for w in vf.residuals.windows(2) {
            prop_assert!(w[1] <= spec.gamma * w[0] + 1e-9);
        }
    }

    #[test]
    fn interpolation_is_a_convex_combination(
        seed in 0u64..1000,
        fx in -0.5..6.5f64,
        fy in -0.5..5.5f64,
        fz in -0.5..6.5f64,
    ) {
        let spec = ToySpec::random(seed);
        let mdp = holed(&spec);
        let lattice = LatticeSpec::build(&mdp, spec.stride()).unwrap();
        let p = Point3::new(fx * spec.sx, fy * spec.sy, -fz * spec.sz);
        let w = lattice.interpolation_weights(p);
        if !w.is_empty() {
            let sum: f64 = w.iter().map(|e| e.1).sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(w.iter().all(|e| e.1 >= 0.0 && lattice.status(e.0 as usize).is_valid()));
            let v: Vec<f64> = (0..lattice.len()).map(|n| (n as f64).sqrt()).collect();
            let val = lattice.interpolate_value(&v, p).unwrap();
            let lo = w.iter().map(|e| v[e.0 as usize]).fold(f64::INFINITY, f64::min);
            let hi = w.iter().map(|e| v[e.0 as usize]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(val >= lo - 1e-12 && val <= hi + 1e-12);
        }
    }

    #[test]
    fn policy_lookup_is_feasible(seed in 0u64..1000, fx in 0.0..1.0f64, fy in 0.0..1.0f64, fz in 0.0..1.0f64) {
        let spec = ToySpec::random(seed);
        let (mdp, sol) = solve(&spec);
        let p = Point3::new(
            fx * (spec.nx - 1) as f64 * spec.sx,
            fy * (spec.ny - 1) as f64 * spec.sy,
            -fz * (spec.nz as f64 - 0.5) * spec.sz,
        );
        let a = sol.policy_lookup(&mdp, p).unwrap();
        prop_assert!(mdp.action_set(p).unwrap().contains(a));
    }
}
