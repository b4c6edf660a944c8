//! Bundled surfaces and generator tables, and loading them by name or path.
//!
//! `S_1_1`, `S_0_4` and `S_1_2` resolve to the files shipped in `data/`. If
//! `TRICOORD_DATA` names a directory, `<name>.json` and
//! `<name>.generators.json` are read from there instead.

use std::path::{Path as FsPath, PathBuf};

use crate::error::{Error, Result};
use crate::mapping::GeneratorTable;
use crate::triangulation::{Triangulation, TriangulationFile};

pub const DATA_ENV: &str = "TRICOORD_DATA";

pub const BUILTIN: [&str; 3] = ["S_1_1", "S_0_4", "S_1_2"];

fn bundled(name: &str) -> Option<(&'static str, &'static str)> {
    Some(match name {
        "S_1_1" => (include_str!("../data/S_1_1.json"), include_str!("../data/S_1_1.generators.json")),
        "S_0_4" => (include_str!("../data/S_0_4.json"), include_str!("../data/S_0_4.generators.json")),
        "S_1_2" => (include_str!("../data/S_1_2.json"), include_str!("../data/S_1_2.generators.json")),
        _ => return None,
    })
}

fn override_dir() -> Option<PathBuf> {
    std::env::var_os(DATA_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn read(path: &FsPath) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

/// Surface text for a built-in name or a file path.
fn surface_text(source: &str) -> Result<String> {
    match (bundled(source), override_dir()) {
        (Some(_), Some(dir)) => read(&dir.join(format!("{source}.json"))),
        (Some((text, _)), None) => Ok(text.to_string()),
        (None, _) => read(FsPath::new(source)),
    }
}

fn generators_text(source: &str) -> Result<String> {
    match (bundled(source), override_dir()) {
        (Some(_), Some(dir)) => read(&dir.join(format!("{source}.generators.json"))),
        (Some((_, text)), None) => Ok(text.to_string()),
        (None, _) => read(FsPath::new(source)),
    }
}

/// Loads a triangulation from a built-in name or a file.
pub fn load_surface(source: &str) -> Result<Triangulation> {
    TriangulationFile::parse(&surface_text(source)?)
}

/// Loads and checks a generator table for `base` from a built-in name or a
/// file.
pub fn load_generators(source: &str, base: &Triangulation) -> Result<GeneratorTable> {
    GeneratorTable::parse(&generators_text(source)?, base)
}

/// A built-in surface with its generator table.
pub fn builtin(name: &str) -> Result<(Triangulation, GeneratorTable)> {
    if bundled(name).is_none() {
        return Err(Error::Parse(format!("unknown surface `{name}` (built-in: {})", BUILTIN.join(", "))));
    }
    let t = load_surface(name)?;
    let table = load_generators(name, &t)?;
    Ok((t, table))
}
