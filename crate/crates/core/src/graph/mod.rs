//! Task-graph model.
//!
//! A [`TaskGraph`] is a DAG of tasks weighted by computational volume and
//! edges weighted by tuple volume, plus the graph period (which doubles as the
//! end-to-end deadline). Structural facts used by the scheduler live in
//! [`StructureIndex`].

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

mod ccr;
mod generate;
mod io;
mod structure;
mod validate;

pub use ccr::{apply_ccr, measure_ccr};
pub use generate::{generate_random, GeneratorParams};
pub use io::{from_json, load, store, to_json};
pub use structure::{derive_structure, StructureIndex};
pub use validate::{validate, ValidationReport, Violation};

fn default_fraction() -> f64 {
    1.0
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    /// Computational volume in operations.
    pub weight: f64,
    /// Follows the imprecise-computation model (mandatory + optional part).
    #[serde(default, skip_serializing_if = "is_false")]
    pub imprecise: bool,
    /// Mandatory share of the scheduled computation time, in (0, 1].
    #[serde(default = "default_fraction")]
    pub mandatory_fraction: f64,
}

impl Task {
    pub fn new(id: impl Into<String>, weight: f64) -> Self {
        Task {
            id: id.into(),
            weight,
            imprecise: false,
            mandatory_fraction: 1.0,
        }
    }

    pub fn imprecise(mut self, mandatory_fraction: f64) -> Self {
        self.imprecise = true;
        self.mandatory_fraction = mandatory_fraction;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: String,
    pub dst: String,
    /// Tuple volume in data units.
    pub volume: f64,
}

impl Edge {
    pub fn new(src: impl Into<String>, dst: impl Into<String>, volume: f64) -> Self {
        Edge {
            src: src.into(),
            dst: dst.into(),
            volume,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskGraph {
    /// Period and end-to-end deadline of the graph.
    pub period: f64,
    pub tasks: Vec<Task>,
    pub edges: Vec<Edge>,
}

impl TaskGraph {
    /// Builds a graph and puts it in canonical order (tasks by id, edges by
    /// `(src, dst)`), which is also the tie-breaking order of the scheduler.
    pub fn new(period: f64, tasks: Vec<Task>, edges: Vec<Edge>) -> Self {
        let mut graph = TaskGraph {
            period,
            tasks,
            edges,
        };
        graph.canonicalize();
        graph
    }

    pub fn canonicalize(&mut self) {
        self.tasks.sort_by(|a, b| id_cmp(&a.id, &b.id));
        self.edges
            .sort_by(|a, b| id_cmp(&a.src, &b.src).then_with(|| id_cmp(&a.dst, &b.dst)));
    }

    pub fn task(&self, id: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.id == id)
    }

    pub fn task_index(&self, id: &str) -> Option<usize> {
        self.tasks.iter().position(|t| t.id == id)
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.tasks.iter().map(|t| t.weight).sum()
    }
}

/// Natural ordering of identifiers: `n2 < n10`, falling back to plain string
/// comparison.
pub fn id_cmp(a: &str, b: &str) -> Ordering {
    fn split(s: &str) -> (&str, Option<u64>) {
        let digits = s.len() - s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, tail) = s.split_at(s.len() - digits);
        (head, tail.parse().ok())
    }
    let (ha, na) = split(a);
    let (hb, nb) = split(b);
    ha.cmp(hb).then(na.cmp(&nb)).then_with(|| a.cmp(b))
}
