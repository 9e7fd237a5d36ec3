mod common;

use std::sync::Arc;

use common::ToySpec;
use icecav::adp::{value_iteration, LatticeSpec, NodeStatus, Solution, SolveOptions};
use icecav::mdp::CavityMdp;
use icecav::policies::{
    Belief, ConstantFractionPolicy, GuidancePolicy, MdpPolicy, PolicyKind, QmdpPolicy, UncontrolledPolicy,
};
use icecav::Point3;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn solved(seed: u64) -> (ToySpec, Arc<CavityMdp>, Arc<Solution>) {
    let spec = ToySpec::random(seed);
    let mdp = Arc::new(spec.mdp());
    let lattice = LatticeSpec::build(&mdp, spec.stride()).unwrap();
    let opts = SolveOptions {
        tolerance: 1e-10,
        max_iters: 100_000,
    };
    let sol = Arc::new(value_iteration(&mdp, lattice, &opts).unwrap());
    (spec, mdp, sol)
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(9)
}

fn box_spec() -> ToySpec {
    let mut spec = ToySpec::random(0);
    spec.nz = 5;
    spec.max_descent = -62.5;
    spec.max_ascent = 37.5;
    spec
}

#[test]
fn constant_fraction_examples() {
    let spec = box_spec();
    let mdp = Arc::new(spec.mdp());
    let half = ConstantFractionPolicy::new(mdp.clone(), 0.5).unwrap();
    // Column from 0 down to -112.5: half way is -56.25.
    assert_eq!(half.target(500.0, 400.0).unwrap(), -56.25);
    let near = Belief::exact(Point3::new(500.0, 400.0, -50.0));
    assert_eq!(half.action(&near, &mut rng()).unwrap(), -56.25);
    let deep = Belief::exact(Point3::new(500.0, 400.0, -112.5));
    let a = half.action(&deep, &mut rng()).unwrap();
    assert!(a < -75.0 && a > -75.0 - 1e-9, "ascent is capped below the open bound: {a}");
    let surface = ConstantFractionPolicy::new(mdp.clone(), 0.0).unwrap();
    let a = surface.action(&near, &mut rng()).unwrap();
    assert!(a < -12.5 && a > -12.5 - 1e-9, "{a}");
    let floor = ConstantFractionPolicy::new(mdp.clone(), 1.0).unwrap();
    let shallow = Belief::exact(Point3::new(500.0, 400.0, -10.0));
    assert_eq!(floor.action(&shallow, &mut rng()).unwrap(), -72.5);
    assert!(ConstantFractionPolicy::new(mdp, 1.5).is_err());
    assert_eq!(half.kind(), PolicyKind::ConstFrac(0.5));
}

#[test]
fn uncontrolled_holds_depth() {
    let p = Point3::new(1.0, 2.0, -3.0);
    assert_eq!(UncontrolledPolicy.action(&Belief::exact(p), &mut rng()).unwrap(), -3.0);
}

#[test]
fn certain_qmdp_equals_mdp_at_nodes() {
    for seed in 0..5 {
        let (_, mdp, sol) = solved(seed);
        let qmdp = QmdpPolicy::new(mdp.clone(), sol.clone(), [0.0; 3], 1).unwrap();
        for n in 0..sol.lattice.len() {
            if sol.lattice.status(n) != NodeStatus::Free {
                continue;
            }
            let b = Belief::exact(sol.lattice.position(n));
            assert_eq!(qmdp.action(&b, &mut rng()).unwrap(), sol.policy.depths[n], "seed {seed} node {n}");
        }
    }
}

#[test]
fn unanimous_samples_follow_the_node_policy() {
    let (spec, mdp, sol) = solved(3);
    let qmdp = QmdpPolicy::new(mdp.clone(), sol.clone(), [1.0, 1.0, 1.0], 8).unwrap();
    let n = spec.index(1, 1, 1);
    let c = sol.lattice.position(n);
    let cloud: Vec<Point3> = (0..8)
        .map(|i| Point3::new(c.x + 10.0 * i as f64, c.y - 5.0 * i as f64, c.z + 0.5 * i as f64))
        .collect();
    let a = qmdp.action_for_samples(c, &cloud).unwrap();
    assert_eq!(a, sol.policy.depths[n]);
}

#[test]
fn two_sample_enumeration() {
    for seed in 0..10 {
        let (spec, mdp, sol) = solved(seed);
        let qmdp = QmdpPolicy::new(mdp.clone(), sol.clone(), [1.0; 3], 2).unwrap();
        let q = qmdp.q_table();
        let (n1, n2) = (spec.index(1, 1, 1), spec.index(1, 1, 2));
        let (l1, l2) = (sol.lattice.action_levels(n1), sol.lattice.action_levels(n2));
        let (p1, p2) = (sol.lattice.position(n1), sol.lattice.position(n2));
        let z_bar = 0.5 * (p1.z + p2.z);
        let mut best: Option<(f64, f64)> = None;
        for (i, l) in l1.iter().enumerate() {
            let Some(j) = l2.iter().position(|m| m == l) else { continue };
            let score = 0.5 * q.node(n1)[i] + 0.5 * q.node(n2)[j];
            let depth = sol.lattice.action_depth(*l);
            let wins = match best {
                None => true,
                Some((s, d)) => {
                    score > s
                        || (score == s
                            && ((depth - z_bar).abs() < (d - z_bar).abs()
                                || ((depth - z_bar).abs() == (d - z_bar).abs() && depth < d)))
                }
            };
            if wins {
                best = Some((score, depth));
            }
        }
        let want = mdp.action_set(p1).unwrap().clip(best.unwrap().1);
        assert_eq!(qmdp.action_for_samples(p1, &[p1, p2]).unwrap(), want, "seed {seed}");
    }
}

#[test]
fn mdp_policy_uses_the_lookup() {
    let (_, mdp, sol) = solved(4);
    let policy = MdpPolicy::new(mdp.clone(), sol.clone());
    let p = Point3::new(1234.0, 567.0, -31.0);
    assert_eq!(policy.action(&Belief::exact(p), &mut rng()).unwrap(), sol.policy_lookup(&mdp, p).unwrap());
    assert!(policy.action(&Belief::exact(Point3::new(-5.0, 0.0, -10.0)), &mut rng()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn certain_qmdp_equals_mdp_anywhere(seed in 0u64..6, fx in 0.0..1.0f64, fy in 0.0..1.0f64, fz in 0.0..1.0f64) {
        let (spec, mdp, sol) = solved(seed);
        let qmdp = QmdpPolicy::new(mdp.clone(), sol.clone(), [0.0; 3], 1).unwrap();
        let p = Point3::new(
            fx * (spec.nx - 1) as f64 * spec.sx,
            fy * (spec.ny - 1) as f64 * spec.sy,
            -fz * (spec.nz as f64 - 0.5) * spec.sz,
        );
        let b = Belief::exact(p);
        prop_assert_eq!(qmdp.action(&b, &mut rng()).unwrap(), sol.policy_lookup(&mdp, p).unwrap());
    }

    #[test]
    fn qmdp_is_deterministic_and_feasible(seed in 0u64..6, rs in 0u64..1000, fx in 0.2..0.8f64, fz in 0.1..0.9f64) {
        let (spec, mdp, sol) = solved(seed);
        let qmdp = QmdpPolicy::new(mdp.clone(), sol.clone(), [300.0, 300.0, 10.0], 16).unwrap();
        let p = Point3::new(fx * (spec.nx - 1) as f64 * spec.sx, 0.5 * spec.sy, -fz * (spec.nz as f64 - 0.5) * spec.sz);
        let b = Belief { mean: p, sigma: [300.0, 300.0, 10.0], samples: 16 };
        let a1 = qmdp.action(&b, &mut ChaCha8Rng::seed_from_u64(rs)).unwrap();
        let a2 = qmdp.action(&b, &mut ChaCha8Rng::seed_from_u64(rs)).unwrap();
        prop_assert_eq!(a1, a2);
        prop_assert!(mdp.action_set(p).unwrap().contains(a1));
        let kept = qmdp.sample_belief(&b, &mut ChaCha8Rng::seed_from_u64(rs));
        prop_assert!(!kept.is_empty() && kept.len() <= 16);
        prop_assert!(kept.iter().all(|s| mdp.is_valid_state(*s)));
    }
}
