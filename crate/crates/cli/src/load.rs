//! Reading the toolkit's file formats.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dgkit::diagonal::{assemble, MicroProgram};
use dgkit::ir::parse_node;
use dgkit::{AgentLoop, Judge, TotalProgram};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn program(path: &Path) -> Result<TotalProgram> {
    let node = parse_node(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    TotalProgram::new(node).with_context(|| format!("in {}", path.display()))
}

pub fn judge(path: &Path) -> Result<Judge> {
    Judge::parse(&read(path)?).with_context(|| format!("in {}", path.display()))
}

pub fn agent(path: &Path) -> Result<AgentLoop> {
    AgentLoop::parse(&read(path)?).with_context(|| format!("in {}", path.display()))
}

/// `.mpa` is assembly; anything else is the binary format.
pub fn micro(path: &Path) -> Result<MicroProgram> {
    let parsed = if path.extension().is_some_and(|e| e == "mpa") {
        assemble(&read(path)?)
    } else {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        MicroProgram::from_file_bytes(&bytes)
    };
    parsed.with_context(|| format!("in {}", path.display()))
}

/// A single program, or every program named in a `.list` file (one path
/// per line relative to the list, `#` comments).
pub fn micro_set(path: &Path) -> Result<Vec<(String, MicroProgram)>> {
    let stem = |p: &Path| p.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    if path.extension().is_none_or(|e| e != "list") {
        return Ok(vec![(stem(path), micro(path)?)]);
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut out = Vec::new();
    for line in read(path)?.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let p: PathBuf = base.join(line);
        out.push((stem(&p), micro(&p)?));
    }
    if out.is_empty() {
        bail!("{} lists no programs", path.display());
    }
    Ok(out)
}
