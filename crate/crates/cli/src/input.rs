use std::path::Path;

use anyhow::{bail, Context, Result};
use maxplus_core::io::{vector_from_file, KernelFile, VectorFile};
use maxplus_core::{graph_metric, MartinInstance, MetricInstance, MpVector, StateSpace, WeightedGraph};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn instance(path: &Path, basepoint: Option<&str>, tol: f64) -> Result<MartinInstance> {
    let file: KernelFile = read_json(path)?;
    let a = file.to_kernel()?;
    let base = match (basepoint, &file.basepoint) {
        (Some(b), _) => b.to_string(),
        (None, Some(b)) => b.clone(),
        (None, None) => match file.states.first() {
            Some(b) => b.clone(),
            None => bail!("{} has no states", path.display()),
        },
    };
    let edge = file.edge_mask(a.states())?;
    Ok(MartinInstance::new(a, &base, tol)?.with_edge_states(edge))
}

pub fn vector(path: &Path, states: &StateSpace) -> Result<MpVector> {
    let file: VectorFile = read_json(path)?;
    Ok(vector_from_file(states, &file)?)
}

/// Comma-separated labels.
pub fn labels(list: &str, states: &StateSpace) -> Result<Vec<usize>> {
    list.split(',')
        .map(|l| states.resolve(l.trim()).map_err(Into::into))
        .collect()
}

pub fn reals(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("not a number: `{v}`")))
        .collect()
}

/// Graph file: the graph plus an optional basepoint and the states where
/// the graph was cut off.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphFile {
    #[serde(flatten)]
    pub graph: WeightedGraph,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub truncated: Vec<String>,
}

pub fn metric(path: &Path, basepoint: Option<&str>, tol: f64) -> Result<MetricInstance> {
    let file: GraphFile = read_json(path)?;
    let base = match (basepoint, &file.basepoint, file.graph.nodes.first()) {
        (Some(b), _, _) => b.to_string(),
        (None, Some(b), _) => b.clone(),
        (None, None, Some(b)) => b.clone(),
        (None, None, None) => bail!("{} has no nodes", path.display()),
    };
    let m = graph_metric(&file.graph, &base, tol)?;
    let mut cut = vec![false; m.n()];
    for l in &file.truncated {
        cut[m.states().resolve(l)?] = true;
    }
    Ok(m.with_truncated(cut))
}
