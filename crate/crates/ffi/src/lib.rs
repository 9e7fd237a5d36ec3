//! C ABI over the icecav toolkit.
//!
//! Every function returns an [`IcecavStatus`]; on failure a message is
//! available from [`icecav_last_error`] until the next call on the same
//! thread. Handles are opaque and must be released with their `_free`
//! function. No function unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::sync::{Arc, OnceLock};

use icecav::adp::{read_solution, CompiledKernel, value_iteration, write_solution, LatticeSpec, QTable, Solution, SolveMeta, SolveOptions};
use icecav::flowfield::{read_grid_archive, synthesize_cavity, write_grid_archive, CavityParams, FlowGrid};
use icecav::mdp::CavityMdp;
use icecav::policies::{Belief, GuidancePolicy, QmdpPolicy};
use icecav::scenario::Scenario;
use icecav::{Error, Point3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IcecavStatus {
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    /// An argument was malformed (bad UTF-8, JSON or buffer size).
    InvalidArgument = 2,
    /// A query lay outside the grid or the navigable water.
    Domain = 3,
    /// Inconsistent configuration.
    Config = 4,
    Io = 5,
    /// Non-finite values or non-convergence.
    Numerical = 6,
    /// An internal panic was caught.
    Panic = 7,
}

/// Flow grid, plus the cavity parameters when synthesised.
pub struct IcecavGrid {
    grid: Arc<FlowGrid>,
    params: Option<CavityParams>,
}

/// Planning problem built on a grid.
pub struct IcecavMdp {
    mdp: Arc<CavityMdp>,
}

/// Solved lattice bound to the problem it was solved for.
pub struct IcecavSolution {
    mdp: Arc<CavityMdp>,
    solution: Arc<Solution>,
    subsample: f64,
    tolerance: f64,
    max_iters: usize,
    q: OnceLock<Arc<QTable>>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(IcecavStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::OutOfDomain { .. } | Error::NotNavigable { .. } | Error::InfeasibleAction { .. } => {
                IcecavStatus::Domain
            }
            Error::Config(_) | Error::Json { .. } => IcecavStatus::Config,
            Error::Io { .. } => IcecavStatus::Io,
            Error::NonFinite { .. } => IcecavStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(IcecavStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(IcecavStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IcecavStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IcecavStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            IcecavStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn icecav_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on this thread.
#[no_mangle]
pub extern "C" fn icecav_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Reads a grid archive directory.
///
/// # Safety
/// `path` must be NUL-terminated; `out_grid` must be valid.
#[no_mangle]
pub unsafe extern "C" fn icecav_grid_read(path: *const c_char, out_grid: *mut *mut IcecavGrid) -> IcecavStatus {
    guard(|| {
        let path = PathBuf::from(str_arg(path, "path")?);
        let slot = out(out_grid, "out_grid")?;
        let grid = read_grid_archive(&path)?;
        *slot = Box::into_raw(Box::new(IcecavGrid {
            grid: Arc::new(grid),
            params: None,
        }));
        Ok(())
    })
}

/// Synthesises a cavity grid from JSON parameters, or the defaults when
/// `params_json` is null.
///
/// # Safety
/// `params_json` must be null or NUL-terminated; `out_grid` must be valid.
#[no_mangle]
pub unsafe extern "C" fn icecav_grid_synthesize(
    params_json: *const c_char,
    seed: u64,
    out_grid: *mut *mut IcecavGrid,
) -> IcecavStatus {
    guard(|| {
        let params: CavityParams = if params_json.is_null() {
            CavityParams::default()
        } else {
            serde_json::from_str(str_arg(params_json, "params_json")?)
                .map_err(|e| invalid(format!("cavity parameters: {e}")))?
        };
        let slot = out(out_grid, "out_grid")?;
        let grid = synthesize_cavity(&params, seed)?;
        *slot = Box::into_raw(Box::new(IcecavGrid {
            grid: Arc::new(grid),
            params: Some(params),
        }));
        Ok(())
    })
}

/// Writes a grid archive directory.
///
/// # Safety
/// `grid` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn icecav_grid_write(grid: *const IcecavGrid, path: *const c_char) -> IcecavStatus {
    guard(|| {
        let g = handle(grid, "grid")?;
        let path = PathBuf::from(str_arg(path, "path")?);
        write_grid_archive(&g.grid, &path)?;
        Ok(())
    })
}

/// Grid dimensions `nx, ny, nz, nt`.
///
/// # Safety
/// `grid` must come from this library; `out_dims` must hold 4 values.
#[no_mangle]
pub unsafe extern "C" fn icecav_grid_dims(grid: *const IcecavGrid, out_dims: *mut usize) -> IcecavStatus {
    guard(|| {
        let g = handle(grid, "grid")?;
        if out_dims.is_null() {
            return Err(null("out_dims"));
        }
        let s = g.grid.spec();
        std::slice::from_raw_parts_mut(out_dims, 4).copy_from_slice(&[s.nx, s.ny, s.nz, s.nt]);
        Ok(())
    })
}

/// Velocity `(u, v, w)` at `(x, y, z, t)`.
///
/// # Safety
/// `grid` must come from this library; `out_uvw` must hold 3 values.
#[no_mangle]
pub unsafe extern "C" fn icecav_grid_interpolate(
    grid: *const IcecavGrid,
    x: f64,
    y: f64,
    z: f64,
    t: f64,
    out_uvw: *mut f64,
) -> IcecavStatus {
    guard(|| {
        let g = handle(grid, "grid")?;
        if out_uvw.is_null() {
            return Err(null("out_uvw"));
        }
        let v = g.grid.interpolate_velocity(Point3::new(x, y, z), t)?;
        std::slice::from_raw_parts_mut(out_uvw, 3).copy_from_slice(&v);
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn icecav_grid_free(grid: *mut IcecavGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Builds the planning problem on `grid` from a scenario JSON document. A
/// null scenario selects the default scenario of a synthesised grid.
///
/// # Safety
/// `grid` must come from this library; `scenario_json` must be null or
/// NUL-terminated; `out_mdp` must be valid.
#[no_mangle]
pub unsafe extern "C" fn icecav_mdp_new(
    grid: *const IcecavGrid,
    scenario_json: *const c_char,
    subsample: f64,
    out_mdp: *mut *mut IcecavMdp,
) -> IcecavStatus {
    guard(|| {
        let g = handle(grid, "grid")?;
        let scenario = if scenario_json.is_null() {
            let params = g
                .params
                .as_ref()
                .ok_or_else(|| invalid("a scenario is required for an archived grid"))?;
            Scenario::synthetic(params)
        } else {
            serde_json::from_str(str_arg(scenario_json, "scenario_json")?)
                .map_err(|e| invalid(format!("scenario: {e}")))?
        };
        let slot = out(out_mdp, "out_mdp")?;
        let mdp = scenario.build_mdp(g.grid.clone(), subsample)?;
        *slot = Box::into_raw(Box::new(IcecavMdp { mdp: Arc::new(mdp) }));
        Ok(())
    })
}

/// Whether `(x, y, z)` is in navigable water above the depth rating.
///
/// # Safety
/// `mdp` must come from this library; `out_valid` must be valid.
#[no_mangle]
pub unsafe extern "C" fn icecav_mdp_is_valid_state(
    mdp: *const IcecavMdp,
    x: f64,
    y: f64,
    z: f64,
    out_valid: *mut bool,
) -> IcecavStatus {
    guard(|| {
        let m = handle(mdp, "mdp")?;
        *out(out_valid, "out_valid")? = m.mdp.is_valid_state(Point3::new(x, y, z));
        Ok(())
    })
}

/// Bounds of the depth action set at a valid state. The lower bound is
/// closed, the upper bound open when set by the ascent rate.
///
/// # Safety
/// `mdp` must come from this library; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn icecav_mdp_action_bounds(
    mdp: *const IcecavMdp,
    x: f64,
    y: f64,
    z: f64,
    out_lo: *mut f64,
    out_hi: *mut f64,
) -> IcecavStatus {
    guard(|| {
        let m = handle(mdp, "mdp")?;
        let set = m.mdp.action_set(Point3::new(x, y, z))?;
        *out(out_lo, "out_lo")? = set.lo();
        *out(out_hi, "out_hi")? = set.hi();
        Ok(())
    })
}

/// # Safety
/// `mdp` must be null or come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn icecav_mdp_free(mdp: *mut IcecavMdp) {
    if !mdp.is_null() {
        drop(Box::from_raw(mdp));
    }
}

/// Solves `mdp` by value iteration on a lattice with the given strides. A
/// non-positive `tolerance` selects the default. A solution that did not
/// converge is still returned, with status `NUMERICAL`, and must be freed.
///
/// # Safety
/// `mdp` must come from this library; `stride` must hold 3 values;
/// `out_solution` must be valid.
#[no_mangle]
pub unsafe extern "C" fn icecav_solve(
    mdp: *const IcecavMdp,
    stride: *const f64,
    subsample: f64,
    tolerance: f64,
    max_iters: usize,
    out_solution: *mut *mut IcecavSolution,
) -> IcecavStatus {
    guard(|| {
        let m = handle(mdp, "mdp")?;
        if stride.is_null() {
            return Err(null("stride"));
        }
        let stride: [f64; 3] = std::slice::from_raw_parts(stride, 3).try_into().expect("three strides");
        let slot = out(out_solution, "out_solution")?;
        let mut opts = SolveOptions::for_mdp(&m.mdp);
        if tolerance > 0.0 {
            opts.tolerance = tolerance;
        }
        opts.max_iters = max_iters;
        let lattice = LatticeSpec::build(&m.mdp, stride)?;
        let solution = value_iteration(&m.mdp, lattice, &opts)?;
        let converged = solution.value.converged;
        let residual = solution.value.residual();
        *slot = Box::into_raw(Box::new(IcecavSolution {
            mdp: m.mdp.clone(),
            solution: Arc::new(solution),
            subsample,
            tolerance: opts.tolerance,
            max_iters,
            q: OnceLock::new(),
        }));
        if converged {
            Ok(())
        } else {
            Err(Failure(
                IcecavStatus::Numerical,
                format!("value iteration stopped at residual {residual:e} after {max_iters} sweeps"),
            ))
        }
    })
}

/// Reads a solution archive solved for `mdp`.
///
/// # Safety
/// `mdp` must come from this library; `path` must be NUL-terminated;
/// `out_solution` must be valid.
#[no_mangle]
pub unsafe extern "C" fn icecav_solution_read(
    mdp: *const IcecavMdp,
    path: *const c_char,
    out_solution: *mut *mut IcecavSolution,
) -> IcecavStatus {
    guard(|| {
        let m = handle(mdp, "mdp")?;
        let path = PathBuf::from(str_arg(path, "path")?);
        let slot = out(out_solution, "out_solution")?;
        let (solution, meta) = read_solution(&path, &m.mdp)?;
        *slot = Box::into_raw(Box::new(IcecavSolution {
            mdp: m.mdp.clone(),
            solution: Arc::new(solution),
            subsample: meta.subsample,
            tolerance: meta.tolerance,
            max_iters: meta.max_iters,
            q: OnceLock::new(),
        }));
        Ok(())
    })
}

/// Writes a solution archive directory.
///
/// # Safety
/// `solution` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn icecav_solution_write(solution: *const IcecavSolution, path: *const c_char) -> IcecavStatus {
    guard(|| {
        let s = handle(solution, "solution")?;
        let path = PathBuf::from(str_arg(path, "path")?);
        let meta = SolveMeta::new(&s.solution, s.subsample, s.tolerance, s.max_iters);
        write_solution(&path, &s.solution, &meta)?;
        Ok(())
    })
}

/// Number of lattice nodes, sweeps performed and convergence flag.
///
/// # Safety
/// `solution` must come from this library; output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn icecav_solution_info(
    solution: *const IcecavSolution,
    out_nodes: *mut usize,
    out_iterations: *mut usize,
    out_converged: *mut bool,
) -> IcecavStatus {
    guard(|| {
        let s = handle(solution, "solution")?;
        *out(out_nodes, "out_nodes")? = s.solution.lattice.len();
        *out(out_iterations, "out_iterations")? = s.solution.value.iterations;
        *out(out_converged, "out_converged")? = s.solution.value.converged;
        Ok(())
    })
}

/// Copies the node values into `buf`, which must hold exactly as many
/// values as the lattice has nodes.
///
/// # Safety
/// `solution` must come from this library; `buf` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn icecav_solution_values(
    solution: *const IcecavSolution,
    buf: *mut f64,
    len: usize,
) -> IcecavStatus {
    guard(|| {
        let s = handle(solution, "solution")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let values = &s.solution.value.values;
        if len != values.len() {
            return Err(invalid(format!("buffer holds {len} values, lattice has {}", values.len())));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(values);
        Ok(())
    })
}

/// MDP policy depth at `(x, y, z)`.
///
/// # Safety
/// `solution` must come from this library; `out_depth` must be valid.
#[no_mangle]
pub unsafe extern "C" fn icecav_mdp_action(
    solution: *const IcecavSolution,
    x: f64,
    y: f64,
    z: f64,
    out_depth: *mut f64,
) -> IcecavStatus {
    guard(|| {
        let s = handle(solution, "solution")?;
        let slot = out(out_depth, "out_depth")?;
        *slot = s.solution.policy_lookup(&s.mdp, Point3::new(x, y, z))?;
        Ok(())
    })
}

/// QMDP depth for a Gaussian belief with mean `(x, y, z)`, standard
/// deviations `sigma` and `samples` draws from a generator seeded by `seed`.
/// The Q table is built on first use.
///
/// # Safety
/// `solution` must come from this library; `sigma` must hold 3 values;
/// `out_depth` must be valid.
#[no_mangle]
pub unsafe extern "C" fn icecav_qmdp_action(
    solution: *const IcecavSolution,
    x: f64,
    y: f64,
    z: f64,
    sigma: *const f64,
    samples: usize,
    seed: u64,
    out_depth: *mut f64,
) -> IcecavStatus {
    guard(|| {
        let s = handle(solution, "solution")?;
        if sigma.is_null() {
            return Err(null("sigma"));
        }
        let sigma: [f64; 3] = std::slice::from_raw_parts(sigma, 3).try_into().expect("three sigmas");
        let slot = out(out_depth, "out_depth")?;
        let q = match s.q.get() {
            Some(q) => q.clone(),
            None => {
                let kernel = CompiledKernel::build(&s.mdp, &s.solution.lattice)?;
                s.q.get_or_init(|| Arc::new(kernel.q_table(&s.solution.value.values))).clone()
            }
        };
        let policy = QmdpPolicy::with_q_table(s.mdp.clone(), s.solution.clone(), q, sigma, samples)?;
        let belief = Belief {
            mean: Point3::new(x, y, z),
            sigma,
            samples,
        };
        *slot = policy.action(&belief, &mut ChaCha8Rng::seed_from_u64(seed))?;
        Ok(())
    })
}

/// # Safety
/// `solution` must be null or come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn icecav_solution_free(solution: *mut IcecavSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}
