use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::grid::{Component, Field4, FlowGrid, GridSpec, Stagger};
use crate::error::{Error, Result};

pub const GRID_FORMAT: &str = "icecav-grid";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableEntry {
    pub name: String,
    pub file: String,
    pub stagger: Stagger,
    /// `[x, y, z, t]`, x varying fastest in the file.
    pub shape: [usize; 4],
}

/// `manifest.json` of a grid archive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridManifest {
    pub format: String,
    pub version: u32,
    pub spec: GridSpec,
    pub byte_order: String,
    pub dtype: String,
    pub order: String,
    pub variables: Vec<VariableEntry>,
}

impl GridManifest {
    pub fn for_spec(spec: &GridSpec) -> Self {
        let var = |name: &str, stagger: Stagger, shape: [usize; 4]| VariableEntry {
            name: name.to_string(),
            file: format!("{name}.raw"),
            stagger,
            shape,
        };
        Self {
            format: GRID_FORMAT.to_string(),
            version: 1,
            spec: spec.clone(),
            byte_order: "little".to_string(),
            dtype: "f32".to_string(),
            order: "x-fastest".to_string(),
            variables: vec![
                var("u", Stagger::XFace, spec.shape(Stagger::XFace)),
                var("v", Stagger::YFace, spec.shape(Stagger::YFace)),
                var("w", Stagger::ZFace, spec.shape(Stagger::ZFace)),
                var("wetfrac", Stagger::Center, [spec.nx, spec.ny, spec.nz, 1]),
            ],
        }
    }
}

pub(crate) fn write_f32_le(path: &Path, data: &[f32]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::with_capacity(1 << 20, file);
    for chunk in data.chunks(1 << 16) {
        let bytes: Vec<u8> = chunk.iter().flat_map(|v| v.to_le_bytes()).collect();
        out.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn read_f32_le(path: &Path, expected: usize) -> Result<Vec<f32>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() != expected * 4 {
        return Err(Error::config(format!(
            "{} holds {} bytes, expected {}",
            path.display(),
            bytes.len(),
            expected * 4
        )));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect())
}

/// Writes `manifest.json` plus one raw little-endian f32 file per variable.
pub fn write_grid_archive(grid: &FlowGrid, dir: &Path) -> Result<GridManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = GridManifest::for_spec(grid.spec());
    for var in &manifest.variables {
        let data = match var.name.as_str() {
            "u" => grid.component(Component::U).as_slice(),
            "v" => grid.component(Component::V).as_slice(),
            "w" => grid.component(Component::W).as_slice(),
            _ => grid.wet_fraction().as_slice(),
        };
        write_f32_le(&dir.join(&var.file), data)?;
    }
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::json(&path, e))?;
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

pub fn read_grid_archive(dir: &Path) -> Result<FlowGrid> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let manifest: GridManifest = serde_json::from_str(&text).map_err(|e| Error::json(&path, e))?;
    if manifest.format != GRID_FORMAT {
        return Err(Error::config(format!("unknown grid format {:?}", manifest.format)));
    }
    if manifest.byte_order != "little" || manifest.dtype != "f32" || manifest.order != "x-fastest" {
        return Err(Error::config(format!(
            "unsupported layout: {} {} {}",
            manifest.byte_order, manifest.dtype, manifest.order
        )));
    }
    let spec = manifest.spec.clone();
    spec.validate()?;
    let expected = GridManifest::for_spec(&spec);
    let mut fields = Vec::new();
    for want in &expected.variables {
        let entry = manifest
            .variables
            .iter()
            .find(|v| v.name == want.name)
            .ok_or_else(|| Error::config(format!("manifest lacks variable {:?}", want.name)))?;
        if entry.stagger != want.stagger || entry.shape != want.shape {
            return Err(Error::config(format!(
                "variable {:?} declared as {:?} {:?}, expected {:?} {:?}",
                entry.name, entry.stagger, entry.shape, want.stagger, want.shape
            )));
        }
        let len = want.shape.iter().product();
        let data = read_f32_le(&dir.join(&entry.file), len)?;
        fields.push(Field4::from_vec(want.shape, data)?);
    }
    let mut it = fields.into_iter();
    let (u, v, w, wet) = (
        it.next().expect("u"),
        it.next().expect("v"),
        it.next().expect("w"),
        it.next().expect("wetfrac"),
    );
    FlowGrid::new(spec, u, v, w, wet)
}
