//! Binary cache of built graphs.
//!
//! Layout: the magic line `SUBHJ-GRAPH-v1\n`, a little-endian `u64` header
//! length, the JSON header `{key, descriptor}`, then the active mask packed
//! eight nodes per byte. Edges are rebuilt from the descriptor on load, so only
//! the mask is checked against the file.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use super::graph::{key_for, HorizontalGraph};
use super::stencil::Stencil;
use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::group::GroupSpec;

pub const MAGIC: &[u8] = b"SUBHJ-GRAPH-v1\n";

fn pack(mask: &[bool]) -> Vec<u8> {
    mask.chunks(8).map(|c| c.iter().enumerate().fold(0u8, |b, (i, &on)| b | (u8::from(on) << i))).collect()
}

pub fn save(graph: &HorizontalGraph, path: &Path) -> Result<()> {
    let header = serde_json::json!({ "key": graph.cache_key(), "descriptor": graph.descriptor() });
    let header = serde_json::to_vec(&header)?;
    let mut f = fs::File::create(path)?;
    f.write_all(MAGIC)?;
    f.write_all(&(header.len() as u64).to_le_bytes())?;
    f.write_all(&header)?;
    f.write_all(&pack(graph.active_mask()))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<HorizontalGraph> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let rest = bytes.strip_prefix(MAGIC).ok_or_else(|| Error::Cache(format!("{} lacks the graph magic", path.display())))?;
    if rest.len() < 8 {
        return Err(Error::Cache("truncated header".into()));
    }
    let len = u64::from_le_bytes(rest[..8].try_into().expect("eight bytes")) as usize;
    let body = &rest[8..];
    if body.len() < len {
        return Err(Error::Cache("truncated header".into()));
    }
    let header: serde_json::Value = serde_json::from_slice(&body[..len])?;
    let desc = &header["descriptor"];
    if header["key"].as_str() != Some(key_for(desc).as_str()) {
        return Err(Error::Cache("header key does not match its descriptor".into()));
    }
    let group: GroupSpec = serde_json::from_value(desc["group"].clone())?;
    let domain: DomainSpec = serde_json::from_value(desc["domain"].clone())?;
    let spacing = desc["spacing"].as_f64().ok_or_else(|| Error::Cache("spacing missing".into()))?;
    let stencil: Stencil = serde_json::from_value(desc["stencil"].clone())?;
    let graph = HorizontalGraph::with_stencil(&group, &domain, spacing, stencil)?;
    if pack(graph.active_mask()) != body[len..] {
        return Err(Error::Cache("stored node mask differs from the rebuilt graph".into()));
    }
    Ok(graph)
}

/// Loads `<dir>/<key>.graph` if present and valid, else builds and stores it.
pub fn load_or_build(dir: &Path, g: &GroupSpec, dom: &DomainSpec, spacing: f64, stencil: Stencil) -> Result<HorizontalGraph> {
    let desc = serde_json::json!({ "group": g, "domain": dom, "spacing": spacing, "stencil": stencil });
    let file: PathBuf = dir.join(format!("{}.graph", key_for(&desc)));
    if file.exists() {
        if let Ok(graph) = load(&file) {
            return Ok(graph);
        }
    }
    let graph = HorizontalGraph::with_stencil(g, dom, spacing, stencil)?;
    fs::create_dir_all(dir)?;
    save(&graph, &file)?;
    Ok(graph)
}
