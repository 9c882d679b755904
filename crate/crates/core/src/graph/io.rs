//! JSON text format for task graphs.
//!
//! ```json
//! {
//!   "period": 100.0,
//!   "tasks": [{ "id": "n1", "weight": 12.0, "mandatory_fraction": 1.0 }],
//!   "edges": [{ "src": "n1", "dst": "n2", "volume": 3.5 }]
//! }
//! ```
//!
//! `imprecise` is optional and defaults to `false`. Stored files are
//! canonical: tasks and edges sorted by id, pretty-printed, trailing newline.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::{validate, TaskGraph};
use crate::{Error, Result};

/// Parses a graph, checks edge references and validates it.
pub fn from_json(text: &str) -> Result<TaskGraph> {
    let mut graph: TaskGraph = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let ids: HashSet<&str> = graph.tasks.iter().map(|t| t.id.as_str()).collect();
    for (k, e) in graph.edges.iter().enumerate() {
        for (field, end) in [("src", &e.src), ("dst", &e.dst)] {
            if !ids.contains(end.as_str()) {
                return Err(Error::Parse(format!(
                    "edges[{k}].{field}: unknown task id `{end}`"
                )));
            }
        }
    }
    let report = validate(&graph);
    if !report.is_ok() {
        return Err(Error::InvalidGraph(report));
    }
    graph.canonicalize();
    Ok(graph)
}

pub fn to_json(graph: &TaskGraph) -> String {
    let mut canonical = graph.clone();
    canonical.canonicalize();
    let mut text = serde_json::to_string_pretty(&canonical).expect("graph serializes");
    text.push('\n');
    text
}

pub fn load(path: impl AsRef<Path>) -> Result<TaskGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

pub fn store(graph: &TaskGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(graph)).map_err(|e| Error::io(path, e))
}
