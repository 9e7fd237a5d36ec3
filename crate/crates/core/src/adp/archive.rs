use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::lattice::{LatticeGeometry, LatticeSpec};
use super::solver::{Policy, Solution, ValueFunction};
use crate::error::{Error, Result};
use crate::mdp::CavityMdp;

pub const SOLUTION_FORMAT: &str = "icecav-solution";
const META_FILE: &str = "solve_meta.json";

/// `solve_meta.json` of a solution archive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveMeta {
    pub format: String,
    pub version: u32,
    pub lattice: LatticeGeometry,
    pub byte_order: String,
    pub dtype: String,
    pub order: String,
    pub files: Vec<String>,
    pub subsample: f64,
    pub tolerance: f64,
    pub max_iters: usize,
    pub iterations: usize,
    pub converged: bool,
    pub residual_history: Vec<f64>,
    pub wall_time_s: f64,
    /// SHA-256 of the inputs, keyed by role.
    pub hashes: BTreeMap<String, String>,
}

impl SolveMeta {
    pub fn new(solution: &Solution, subsample: f64, tolerance: f64, max_iters: usize) -> Self {
        Self {
            format: SOLUTION_FORMAT.to_string(),
            version: 1,
            lattice: solution.lattice.geometry().clone(),
            byte_order: "little".to_string(),
            dtype: "f64".to_string(),
            order: "x-fastest".to_string(),
            files: vec!["values.raw".to_string(), "policy.raw".to_string()],
            subsample,
            tolerance,
            max_iters,
            iterations: solution.value.iterations,
            converged: solution.value.converged,
            residual_history: solution.value.residuals.clone(),
            wall_time_s: 0.0,
            hashes: BTreeMap::new(),
        }
    }
}

fn write_f64_le(path: &Path, data: &[f64]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for v in data {
        out.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn read_f64_le(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() != expected * 8 {
        return Err(Error::config(format!(
            "{} holds {} bytes, expected {}",
            path.display(),
            bytes.len(),
            expected * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect())
}

/// Writes `values.raw`, `policy.raw` (NaN at excluded nodes) and
/// `solve_meta.json`.
pub fn write_solution(dir: &Path, solution: &Solution, meta: &SolveMeta) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_f64_le(&dir.join("values.raw"), &solution.value.values)?;
    write_f64_le(&dir.join("policy.raw"), &solution.policy.depths)?;
    let path = dir.join(META_FILE);
    let text = serde_json::to_string_pretty(meta).map_err(|e| Error::json(&path, e))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

pub fn read_solve_meta(dir: &Path) -> Result<SolveMeta> {
    let path = dir.join(META_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let meta: SolveMeta = serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
    if meta.format != SOLUTION_FORMAT || meta.dtype != "f64" || meta.byte_order != "little" {
        return Err(Error::config(format!(
            "unsupported solution archive {} ({} {})",
            meta.format, meta.dtype, meta.byte_order
        )));
    }
    Ok(meta)
}

/// Reads a solution archive and rebuilds its lattice against `mdp`.
pub fn read_solution(dir: &Path, mdp: &CavityMdp) -> Result<(Solution, SolveMeta)> {
    let meta = read_solve_meta(dir)?;
    let lattice = LatticeSpec::with_geometry(mdp, meta.lattice.clone())?;
    let n = lattice.len();
    let values = read_f64_le(&dir.join("values.raw"), n)?;
    let depths = read_f64_le(&dir.join("policy.raw"), n)?;
    let mut choice = Vec::with_capacity(n);
    for (node, &d) in depths.iter().enumerate() {
        let valid = lattice.status(node).is_valid();
        if valid != !d.is_nan() && !(valid && lattice.action_levels(node).is_empty()) {
            return Err(Error::config(format!(
                "policy archive does not match the lattice at node {node}"
            )));
        }
        choice.push(
            lattice
                .action_levels(node)
                .iter()
                .position(|&l| lattice.action_depth(l) == d)
                .map(|c| c as u32),
        );
    }
    let solution = Solution {
        lattice,
        value: ValueFunction {
            values,
            iterations: meta.iterations,
            residuals: meta.residual_history.clone(),
            converged: meta.converged,
        },
        policy: Policy { depths, choice },
    };
    Ok((solution, meta))
}
