//! The `icecav` command line: `synth`, `solve`, `rollout` and `report`.
//!
//! Exit codes: 0 on success, 2 for usage, configuration and i/o errors, 3
//! for numerical failures and non-convergence.

mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::adp::{read_solution, read_solve_meta, value_iteration, LatticeSpec, SolveMeta, SolveOptions};
use crate::error::{Error, Result};
use crate::flowfield::{read_grid_archive, synthesize_cavity, write_grid_archive, CavityParams, FlowGrid};
use crate::geometry::Point3;
use crate::policies::{
    ConstantFractionPolicy, GuidancePolicy, MdpPolicy, PolicyKind, QmdpPolicy, UncontrolledPolicy,
};
use crate::scenario::{GridRef, Scenario};
use crate::simulator::{export_rollouts, read_stats, run_experiment, RolloutConfig, STATS_FILE};

pub use manifest::{sha256_files, sha256_hex, sha256_json, RunManifest, RUN_MANIFEST_FILE};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

pub const REPORT_HEADER: &str = "policy,reached_pct,median_h,std_h";

#[derive(Debug, Parser)]
#[command(name = "icecav", version, about = "Depth guidance for drifting under-ice vehicles")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "ICECAV_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cavity grid archive.
    Synth(SynthArgs),
    /// Solve the planning problem on a lattice.
    Solve(SolveArgs),
    /// Simulate a policy against ground-truth flow.
    Rollout(RolloutArgs),
    /// Tabulate rollout statistics.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Cavity parameters (JSON); defaults when omitted.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Grid archive directory.
    #[arg(long, conflicts_with = "synth")]
    pub grid: Option<PathBuf>,
    /// Synthesise the grid from these cavity parameters instead.
    #[arg(long)]
    pub synth: Option<PathBuf>,
    /// Seed of the synthetic grid.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Lattice strides in metres, `x,y,z`.
    #[arg(long, default_value = "840,840,25", value_parser = parse_triple)]
    pub stride: [f64; 3],
    /// Fraction of snapshots the planner sees.
    #[arg(long, default_value_t = 0.2)]
    pub subsample: f64,
    /// Sup-norm stopping tolerance; defaults to 1e-4 of the largest terminal
    /// reward.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 5000)]
    pub max_iters: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RolloutArgs {
    #[arg(long, conflicts_with = "synth")]
    pub grid: Option<PathBuf>,
    #[arg(long)]
    pub synth: Option<PathBuf>,
    /// Seed of the synthetic grid.
    #[arg(long, default_value_t = 0)]
    pub synth_seed: u64,
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Solution archive directory (mdp and qmdp policies).
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// `uncontrolled`, `constfrac:<f>`, `mdp` or `qmdp:<sx>,<sy>,<sz>,<Nb>`.
    #[arg(long)]
    pub policy: String,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Start position `x,y,z` overriding the scenario.
    #[arg(long, value_parser = parse_triple)]
    pub start: Option<[f64; 3]>,
    #[arg(long, default_value_t = 90.0)]
    pub timeout_days: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Rollout output directories, one table row each.
    #[arg(required = true)]
    pub dirs: Vec<PathBuf>,
    /// Also write the table to this file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_triple(s: &str) -> std::result::Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|_| format!("expected three comma-separated numbers, got {s:?}"))
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE },
            message: e.to_string(),
        }
    }
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main_from_env() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

pub fn run(cli: Cli) -> std::result::Result<(), Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::config("--threads must be at least 1").into());
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::from(Error::config(format!("thread pool: {e}"))))?;
    pool.install(|| match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Rollout(a) => cmd_rollout(&a),
        Command::Report(a) => cmd_report(&a),
    })
}

fn read_params(path: &Path) -> Result<CavityParams> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

/// Grid, its hash and, when synthetic, the parameters used.
struct LoadedGrid {
    grid: Arc<FlowGrid>,
    hash: String,
    params: Option<CavityParams>,
}

fn archive_hash(dir: &Path) -> Result<String> {
    let files: Vec<PathBuf> = ["manifest.json", "u.raw", "v.raw", "w.raw", "wetfrac.raw"]
        .iter()
        .map(|f| dir.join(f))
        .collect();
    let refs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
    sha256_files(&refs)
}

#[derive(Serialize)]
struct SynthKey<'a> {
    params: &'a CavityParams,
    seed: u64,
}

fn synth_grid(params: CavityParams, seed: u64) -> Result<LoadedGrid> {
    let grid = Arc::new(synthesize_cavity(&params, seed)?);
    let hash = sha256_json(&SynthKey { params: &params, seed });
    Ok(LoadedGrid {
        grid,
        hash,
        params: Some(params),
    })
}

fn load_grid(
    grid: Option<&Path>,
    synth: Option<&Path>,
    seed: u64,
    scenario: Option<&Scenario>,
) -> Result<LoadedGrid> {
    if let Some(dir) = grid {
        return Ok(LoadedGrid {
            grid: Arc::new(read_grid_archive(dir)?),
            hash: archive_hash(dir)?,
            params: None,
        });
    }
    if let Some(path) = synth {
        return synth_grid(read_params(path)?, seed);
    }
    match scenario.and_then(|s| s.grid.clone()) {
        Some(GridRef::Archive(dir)) => load_grid(Some(&dir), None, seed, None),
        Some(GridRef::Synthetic { params, seed }) => synth_grid(params, seed),
        None => Err(Error::config("no grid: pass --grid, --synth or a scenario with a grid")),
    }
}

/// Scenario from `--scenario`, or the default one for a synthetic grid.
fn load_scenario(path: Option<&Path>) -> Result<Option<(Scenario, String)>> {
    match path {
        Some(p) => {
            let scenario = Scenario::load(p)?;
            Ok(Some((scenario, sha256_files(&[p])?)))
        }
        None => Ok(None),
    }
}

fn resolve_scenario(given: Option<(Scenario, String)>, grid: &LoadedGrid) -> Result<(Scenario, String)> {
    match (given, &grid.params) {
        (Some(s), _) => Ok(s),
        (None, Some(params)) => {
            let s = Scenario::synthetic(params);
            let hash = sha256_json(&s);
            Ok((s, hash))
        }
        (None, None) => Err(Error::config("--scenario is required with an archived grid")),
    }
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn cmd_synth(a: &SynthArgs) -> std::result::Result<(), Failure> {
    let started = Instant::now();
    let params = match &a.params {
        Some(p) => read_params(p)?,
        None => CavityParams::default(),
    };
    let grid = synthesize_cavity(&params, a.seed)?;
    create_out(&a.out)?;
    write_grid_archive(&grid, &a.out)?;
    let mut scenario = Scenario::synthetic(&params);
    scenario.grid = Some(GridRef::Archive(PathBuf::from(".")));
    scenario.save(&a.out.join("scenario.json"))?;

    let mut m = RunManifest::new("synth");
    m.config_hashes.insert("params".into(), sha256_json(&SynthKey { params: &params, seed: a.seed }));
    m.config_hashes.insert("grid".into(), archive_hash(&a.out)?);
    m.wall_times_s.insert("total".into(), started.elapsed().as_secs_f64());
    m.outputs = ["manifest.json", "u.raw", "v.raw", "w.raw", "wetfrac.raw", "scenario.json"]
        .map(String::from)
        .to_vec();
    m.write(&a.out)?;
    Ok(())
}

#[derive(Serialize)]
struct SolverKey {
    stride: [f64; 3],
    subsample: f64,
    tolerance: f64,
    max_iters: usize,
}

fn cmd_solve(a: &SolveArgs) -> std::result::Result<(), Failure> {
    let started = Instant::now();
    if let Some(tol) = a.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::config(format!("--tol {tol} must be positive")).into());
        }
    }
    let given = load_scenario(a.scenario.as_deref())?;
    let loaded = load_grid(a.grid.as_deref(), a.synth.as_deref(), a.seed, given.as_ref().map(|s| &s.0))?;
    let (scenario, scenario_hash) = resolve_scenario(given, &loaded)?;
    let load_time = started.elapsed().as_secs_f64();

    let mdp = scenario.build_mdp(loaded.grid.clone(), a.subsample)?;
    let mut opts = SolveOptions::for_mdp(&mdp);
    if let Some(tol) = a.tol {
        opts.tolerance = tol;
    }
    opts.max_iters = a.max_iters;
    opts.validate()?;
    let lattice = LatticeSpec::build(&mdp, a.stride)?;
    let solve_start = Instant::now();
    let solution = value_iteration(&mdp, lattice, &opts)?;
    let solve_time = solve_start.elapsed().as_secs_f64();

    let solver_hash = sha256_json(&SolverKey {
        stride: a.stride,
        subsample: a.subsample,
        tolerance: opts.tolerance,
        max_iters: opts.max_iters,
    });
    let mut meta = SolveMeta::new(&solution, a.subsample, opts.tolerance, opts.max_iters);
    meta.wall_time_s = solve_time;
    meta.hashes.insert("grid".into(), loaded.hash.clone());
    meta.hashes.insert("scenario".into(), scenario_hash.clone());
    meta.hashes.insert("solver".into(), solver_hash.clone());
    create_out(&a.out)?;
    crate::adp::write_solution(&a.out, &solution, &meta)?;
    scenario.save(&a.out.join("scenario.json"))?;

    let mut m = RunManifest::new("solve");
    m.config_hashes.insert("grid".into(), loaded.hash);
    m.config_hashes.insert("scenario".into(), scenario_hash);
    m.config_hashes.insert("solver".into(), solver_hash);
    m.wall_times_s.insert("load".into(), load_time);
    m.wall_times_s.insert("solve".into(), solve_time);
    m.wall_times_s.insert("total".into(), started.elapsed().as_secs_f64());
    m.outputs = ["values.raw", "policy.raw", "solve_meta.json", "scenario.json"]
        .map(String::from)
        .to_vec();
    m.write(&a.out)?;

    if !solution.value.converged {
        return Err(Failure {
            code: EXIT_NUMERICAL,
            message: format!(
                "value iteration did not converge in {} sweeps (residual {:.3e} > {:.3e}); partial results in {}",
                solution.value.iterations,
                solution.value.residual(),
                opts.tolerance,
                a.out.display()
            ),
        });
    }
    Ok(())
}

#[derive(Serialize)]
struct RolloutKey<'a> {
    policy: &'a str,
    config: &'a RolloutConfig,
}

fn cmd_rollout(a: &RolloutArgs) -> std::result::Result<(), Failure> {
    let started = Instant::now();
    let kind: PolicyKind = a.policy.parse()?;
    if kind.needs_solution() && a.solution.is_none() {
        return Err(Error::config(format!("policy {kind} needs --solution")).into());
    }
    if !(a.timeout_days.is_finite() && a.timeout_days > 0.0) {
        return Err(Error::config("--timeout-days must be positive").into());
    }
    let meta = a.solution.as_deref().map(read_solve_meta).transpose()?;
    let given = load_scenario(a.scenario.as_deref())?;
    let loaded = load_grid(a.grid.as_deref(), a.synth.as_deref(), a.synth_seed, given.as_ref().map(|s| &s.0))?;
    let (scenario, scenario_hash) = resolve_scenario(given, &loaded)?;
    let subsample = meta.as_ref().map_or(1.0, |m| m.subsample);
    let mdp = Arc::new(scenario.build_mdp(loaded.grid.clone(), subsample)?);

    let mut solution_hash = None;
    let solution = match &a.solution {
        Some(dir) if kind.needs_solution() => {
            let (sol, _) = read_solution(dir, &mdp)?;
            solution_hash = Some(sha256_files(&[&dir.join("values.raw"), &dir.join("policy.raw")])?);
            Some(Arc::new(sol))
        }
        _ => None,
    };
    let policy: Box<dyn GuidancePolicy> = match kind {
        PolicyKind::Uncontrolled => Box::new(UncontrolledPolicy),
        PolicyKind::ConstFrac(f) => Box::new(ConstantFractionPolicy::new(mdp.clone(), f)?),
        PolicyKind::Mdp => Box::new(MdpPolicy::new(mdp.clone(), solution.clone().expect("solution"))),
        PolicyKind::Qmdp { sigma, samples } => Box::new(QmdpPolicy::new(
            mdp.clone(),
            solution.clone().expect("solution"),
            sigma,
            samples,
        )?),
    };

    let start = a.start.map(Point3::from).unwrap_or(scenario.start);
    let mut config = RolloutConfig::new(start, a.n, a.seed);
    config.delta = mdp.config().delta;
    config.timeout = a.timeout_days * 86_400.0;
    let sim_start = Instant::now();
    let results = run_experiment(&loaded.grid, &mdp, &[policy.as_ref()], &config, scenario.goal_label())?;
    let sim_time = sim_start.elapsed().as_secs_f64();
    let result = &results[0];
    create_out(&a.out)?;
    let outputs = export_rollouts(&result.records, &result.stats, &a.out)?;

    let mut m = RunManifest::new("rollout");
    m.config_hashes.insert("grid".into(), loaded.hash);
    m.config_hashes.insert("scenario".into(), scenario_hash);
    if let Some(h) = solution_hash {
        m.config_hashes.insert("solution".into(), h);
    }
    let policy_name = kind.to_string();
    m.config_hashes.insert(
        "rollout".into(),
        sha256_json(&RolloutKey { policy: &policy_name, config: &config }),
    );
    m.wall_times_s.insert("simulate".into(), sim_time);
    m.wall_times_s.insert("total".into(), started.elapsed().as_secs_f64());
    m.outputs = outputs;
    m.write(&a.out)?;
    Ok(())
}

fn fmt_hours(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_string(), |h| format!("{h:.1}"))
}

/// Quotes a CSV field holding a comma or quote.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Comparison table of the `stats.json` files in `dirs`, in input order.
pub fn report_table(dirs: &[PathBuf]) -> Result<String> {
    if dirs.is_empty() {
        return Err(Error::config("report needs at least one rollout directory"));
    }
    let mut table = format!("{REPORT_HEADER}\n");
    for dir in dirs {
        let s = read_stats(&dir.join(STATS_FILE))?;
        let _ = writeln!(
            table,
            "{},{:.1},{},{}",
            csv_field(&s.policy),
            100.0 * s.success_fraction,
            fmt_hours(s.median_time_h),
            fmt_hours(s.std_time_h)
        );
    }
    Ok(table)
}

fn cmd_report(a: &ReportArgs) -> std::result::Result<(), Failure> {
    let table = report_table(&a.dirs)?;
    print!("{table}");
    if let Some(path) = &a.out {
        fs::write(path, &table).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
