use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use spr_shift_core::graph::{DirectedGraph, GraphDescription};
use spr_shift_core::CylinderPotential;

use crate::bundle::short_hash;

pub struct LoadedGraph {
    pub graph: DirectedGraph,
    pub hash: String,
}

pub fn load_graph(path: &Path) -> Result<LoadedGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read graph file {}", path.display()))?;
    let desc = GraphDescription::from_json(&text)?;
    let graph = DirectedGraph::build(&desc)?;
    Ok(LoadedGraph {
        hash: short_hash(desc.to_json().as_bytes()),
        graph,
    })
}

/// Either a full table `{range, table: [{word, value}]}` or per-symbol
/// values `{values: [..]}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum PotentialFile {
    Symbolwise { values: Vec<f64> },
    Table(CylinderPotential),
}

pub fn load_potential(path: &Path, g: &DirectedGraph) -> Result<CylinderPotential> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read potential file {}", path.display()))?;
    let parsed: PotentialFile =
        serde_json::from_str(&text).with_context(|| format!("potential file {} is malformed", path.display()))?;
    let pot = match parsed {
        PotentialFile::Symbolwise { values } => CylinderPotential::symbolwise(g, &values)?,
        PotentialFile::Table(p) => p,
    };
    pot.validate(g)?;
    Ok(pot)
}

pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| anyhow::anyhow!("{what}: cannot parse {s:?}"))
        })
        .collect()
}

/// `lo:hi:n` gives `n + 1` equally spaced points; otherwise a comma list.
pub fn parse_grid(text: &str, what: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [lo, hi, n] => {
            let lo: f64 = lo.trim().parse().with_context(|| format!("{what}: bad lower end"))?;
            let hi: f64 = hi.trim().parse().with_context(|| format!("{what}: bad upper end"))?;
            let n: usize = n.trim().parse().with_context(|| format!("{what}: bad point count"))?;
            if n == 0 || lo >= hi || lo.is_nan() || hi.is_nan() {
                bail!("{what}: needs lo < hi and n >= 1");
            }
            Ok(spr_shift_core::thermo::linspace(lo, hi, n))
        }
        [_] => parse_list(text, what),
        _ => bail!("{what}: expected lo:hi:n or a comma list"),
    }
}
