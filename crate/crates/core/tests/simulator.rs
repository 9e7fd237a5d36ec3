mod common;

use std::sync::Arc;

use icecav::flowfield::FlowGrid;
use icecav::mdp::{CavityMdp, MdpConfig, TerminalRegion};
use icecav::policies::{ConstantFractionPolicy, GuidancePolicy, UncontrolledPolicy};
use icecav::simulator::{
    export_rollouts, read_stats, run_experiment, run_rollout, start_time, RolloutConfig, OUTCOMES_FILE,
    STATS_FILE, TIMEOUT_LABEL, TRAJECTORIES_FILE,
};
use icecav::Point3;

const GOAL: &str = "grounding_zone";

fn world(f: impl Fn(usize) -> [f32; 3]) -> (Arc<FlowGrid>, CavityMdp) {
    let grid = Arc::new(common::uniform_grid([6, 4, 10, 24], [1000.0, 1000.0, 20.0, 3600.0], f));
    let gz = TerminalRegion::rectangle(GOAL, 500.0, [4500.0, 9000.0], [-1000.0, 4000.0]);
    let mdp = CavityMdp::from_grid(grid.clone(), 1.0, vec![gz], MdpConfig::default()).unwrap();
    (grid, mdp)
}

fn config(start: Point3, days: f64) -> RolloutConfig {
    RolloutConfig {
        timeout: days * 86_400.0,
        ..RolloutConfig::new(start, 4, 17)
    }
}

#[test]
fn start_inside_goal_ends_immediately() {
    let (grid, mdp) = world(|_| [0.1, 0.0, 0.0]);
    let rec = run_rollout(&grid, &mdp, &UncontrolledPolicy, &config(Point3::new(4800.0, 1500.0, -50.0), 5.0), 0)
        .unwrap();
    assert_eq!(rec.outcome, GOAL);
    assert_eq!(rec.time_to_outcome, 0.0);
    assert_eq!(rec.points.len(), 1);
    assert_eq!(rec.points[0].action, None);
    assert_eq!(rec.cumulative_reward, 500.0);
    assert_eq!(rec.energy, 0.0);
}

#[test]
fn still_water_times_out() {
    let (grid, mdp) = world(|_| [0.0; 3]);
    let start = Point3::new(1000.0, 1500.0, -100.0);
    let rec = run_rollout(&grid, &mdp, &UncontrolledPolicy, &config(start, 10.0), 2).unwrap();
    assert_eq!(rec.outcome, TIMEOUT_LABEL);
    assert_eq!(rec.time_to_outcome, 240.0 * 3600.0);
    assert_eq!(rec.points.len(), 241);
    assert!(rec.points.iter().all(|p| p.state == start));
    assert_eq!(rec.energy, 240.0);
    assert_eq!(rec.cumulative_reward, -240.0);
}

#[test]
fn uniform_flow_arrives_in_ten_steps() {
    let (grid, mdp) = world(|_| [0.1, 0.0, 0.0]);
    let start = Point3::new(1000.0, 1500.0, -100.0);
    let rec = run_rollout(&grid, &mdp, &UncontrolledPolicy, &config(start, 10.0), 0).unwrap();
    assert_eq!(rec.outcome, GOAL);
    assert_eq!(rec.points.len(), 11);
    assert!((rec.time_to_outcome - 36_000.0).abs() < 1e-9);
    for (k, p) in rec.points.iter().enumerate() {
        assert!((p.state.x - (1000.0 + 360.0 * k as f64)).abs() < 1e-3, "step {k}: {}", p.state);
        assert_eq!(p.state.y, 1500.0);
        assert_eq!(p.t, 3600.0 * k as f64);
    }
    assert_eq!(rec.energy, 10.0);
    assert_eq!(rec.cumulative_reward, 500.0 - 10.0);
}

#[test]
fn leaving_the_cavity_is_infeasible() {
    let (grid, mdp) = world(|_| [-0.1, 0.0, 0.0]);
    let rec = run_rollout(&grid, &mdp, &UncontrolledPolicy, &config(Point3::new(500.0, 1500.0, -100.0), 5.0), 0)
        .unwrap();
    assert_eq!(rec.outcome, "infeasible");
    assert_eq!(rec.points.len(), 3);
    assert_eq!(rec.cumulative_reward, -2.0 + MdpConfig::default().r_infeasible);
}

#[test]
fn energy_counts_ascent() {
    let (grid, mdp) = world(|_| [0.1, 0.0, 0.0]);
    let mdp = Arc::new(mdp);
    let cfg = mdp.config().clone();
    let policy = ConstantFractionPolicy::new(mdp.clone(), 0.1).unwrap();
    let rec = run_rollout(&grid, &mdp, &policy, &config(Point3::new(1000.0, 1500.0, -190.0), 10.0), 1).unwrap();
    let mut energy = 0.0;
    for w in rec.points.windows(2) {
        let a = w[0].action.unwrap();
        assert_eq!(w[1].state.z, a);
        assert!(mdp.action_set(w[0].state).unwrap().contains(a));
        energy += -cfg.e_h - cfg.alpha_b * (a - w[0].state.z).max(0.0);
    }
    assert!(energy > 10.0, "the climb costs more than hotel load alone");
    assert!((rec.energy - energy).abs() < 1e-9);
    assert!((rec.cumulative_reward - (500.0 - energy)).abs() < 1e-9);
}

#[test]
fn starts_are_paired_across_policies() {
    let (grid, mdp) = world(|n| [0.02 + 0.01 * (n % 3) as f32, 0.0, 0.0]);
    let mdp = Arc::new(mdp);
    let frac = ConstantFractionPolicy::new(mdp.clone(), 0.5).unwrap();
    let policies: [&dyn GuidancePolicy; 2] = [&UncontrolledPolicy, &frac];
    let cfg = config(Point3::new(1000.0, 1500.0, -100.0), 10.0);
    let out = run_experiment(&grid, &mdp, &policies, &cfg, GOAL).unwrap();
    let spec = grid.spec();
    for i in 0..cfg.n_rollouts {
        let t = out[0].records[i].start_time;
        assert_eq!(t, out[1].records[i].start_time);
        assert_eq!(t, start_time(&grid, cfg.seed, i));
        assert!(t >= spec.t0() && t < spec.t_end());
    }
    assert_ne!(out[0].records[0].start_time, out[0].records[1].start_time);
    for r in &out {
        assert_eq!(r.stats.n_rollouts, cfg.n_rollouts);
        assert_eq!(r.stats.outcome_counts.values().sum::<usize>(), cfg.n_rollouts);
    }
}

#[test]
fn exports_are_reproducible() {
    let (grid, mdp) = world(|n| [0.03 + 0.01 * (n % 5) as f32, 0.005, 0.0]);
    let cfg = config(Point3::new(1000.0, 1000.0, -100.0), 10.0);
    let run = || run_experiment(&grid, &mdp, &[&UncontrolledPolicy], &cfg, GOAL).unwrap().remove(0);
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let files = export_rollouts(&a.records, &a.stats, da.path()).unwrap();
    export_rollouts(&b.records, &b.stats, db.path()).unwrap();
    for f in [TRAJECTORIES_FILE, OUTCOMES_FILE, STATS_FILE] {
        assert!(files.iter().any(|g| g == f));
        assert_eq!(std::fs::read(da.path().join(f)).unwrap(), std::fs::read(db.path().join(f)).unwrap());
    }
    let traj = std::fs::read_to_string(da.path().join(TRAJECTORIES_FILE)).unwrap();
    assert_eq!(traj.lines().next(), Some("rollout_id,t,x,y,z,action,outcome"));
    let rows = a.records.iter().map(|r| r.points.len()).sum::<usize>();
    assert_eq!(traj.lines().count(), rows + 1);
    let outcomes = std::fs::read_to_string(da.path().join(OUTCOMES_FILE)).unwrap();
    assert_eq!(outcomes.lines().count(), cfg.n_rollouts + 1);
    assert_eq!(read_stats(&da.path().join(STATS_FILE)).unwrap(), a.stats);
}

#[test]
fn truth_runs_at_full_time_resolution() {
    // Every fourth snapshot is still; planning at a quarter subsample sees
    // only those.
    let (grid, _) = world(|n| if n % 4 == 0 { [0.0; 3] } else { [0.1, 0.0, 0.0] });
    let gz = TerminalRegion::rectangle(GOAL, 500.0, [4500.0, 9000.0], [-1000.0, 4000.0]);
    let planning = CavityMdp::from_grid(grid.clone(), 0.25, vec![gz], MdpConfig::default()).unwrap();
    let start = Point3::new(1000.0, 1500.0, -100.0);
    let dist = planning.distribution_at(start).unwrap();
    assert_eq!(dist.len(), 6);
    assert!(dist.samples().iter().all(|v| *v == [0.0; 3]));
    let rec = run_rollout(&grid, &planning, &UncontrolledPolicy, &config(start, 10.0), 0).unwrap();
    assert_eq!(rec.outcome, GOAL);
}

#[test]
fn invalid_start_is_rejected() {
    let (grid, mdp) = world(|_| [0.0; 3]);
    let bad = config(Point3::new(1000.0, 1500.0, 10.0), 1.0);
    assert!(run_rollout(&grid, &mdp, &UncontrolledPolicy, &bad, 0).is_err());
    let none = RolloutConfig {
        n_rollouts: 0,
        ..config(Point3::new(1000.0, 1500.0, -10.0), 1.0)
    };
    assert!(run_experiment(&grid, &mdp, &[&UncontrolledPolicy], &none, GOAL).is_err());
}
