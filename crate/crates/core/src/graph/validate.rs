use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::TaskGraph;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonPositivePeriod { period: f64 },
    DuplicateTask { id: String },
    NegativeWeight { task: String },
    MandatoryFraction { task: String, value: f64 },
    UnknownTask { id: String, edge: (String, String) },
    SelfEdge { task: String },
    DuplicateEdge { src: String, dst: String },
    NegativeVolume { src: String, dst: String },
    Cycle { task: String },
    NoEntry,
    NoExit,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositivePeriod { period } => write!(f, "period {period} is not positive"),
            Violation::DuplicateTask { id } => write!(f, "duplicate task id `{id}`"),
            Violation::NegativeWeight { task } => {
                write!(f, "task `{task}` has a negative or non-finite weight")
            }
            Violation::MandatoryFraction { task, value } => {
                write!(
                    f,
                    "task `{task}` has mandatory fraction {value} outside (0, 1]"
                )
            }
            Violation::UnknownTask { id, edge } => {
                write!(
                    f,
                    "edge ({}, {}) references unknown task `{id}`",
                    edge.0, edge.1
                )
            }
            Violation::SelfEdge { task } => write!(f, "self-edge on `{task}`"),
            Violation::DuplicateEdge { src, dst } => write!(f, "duplicate edge ({src}, {dst})"),
            Violation::NegativeVolume { src, dst } => {
                write!(f, "edge ({src}, {dst}) has a negative or non-finite volume")
            }
            Violation::Cycle { task } => write!(f, "graph is cyclic (through `{task}`)"),
            Violation::NoEntry => write!(f, "no entry task"),
            Violation::NoExit => write!(f, "no exit task"),
        }
    }
}

/// All invariant violations found in a graph; empty iff well-formed.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate(graph: &TaskGraph) -> ValidationReport {
    let mut out = Vec::new();
    if !(graph.period > 0.0 && graph.period.is_finite()) {
        out.push(Violation::NonPositivePeriod {
            period: graph.period,
        });
    }

    let mut ids = HashSet::new();
    for t in &graph.tasks {
        if !ids.insert(t.id.as_str()) {
            out.push(Violation::DuplicateTask { id: t.id.clone() });
        }
        if !(t.weight >= 0.0 && t.weight.is_finite()) {
            out.push(Violation::NegativeWeight { task: t.id.clone() });
        }
        if !(t.mandatory_fraction > 0.0 && t.mandatory_fraction <= 1.0) {
            out.push(Violation::MandatoryFraction {
                task: t.id.clone(),
                value: t.mandatory_fraction,
            });
        }
    }

    let mut pairs = HashSet::new();
    let mut adjacency: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut has_pred = HashSet::new();
    let mut has_succ = HashSet::new();
    for e in &graph.edges {
        let mut known = true;
        for end in [&e.src, &e.dst] {
            if !ids.contains(end.as_str()) {
                known = false;
                out.push(Violation::UnknownTask {
                    id: end.clone(),
                    edge: (e.src.clone(), e.dst.clone()),
                });
            }
        }
        if e.src == e.dst {
            out.push(Violation::SelfEdge {
                task: e.src.clone(),
            });
        }
        if !pairs.insert((e.src.as_str(), e.dst.as_str())) {
            out.push(Violation::DuplicateEdge {
                src: e.src.clone(),
                dst: e.dst.clone(),
            });
        }
        if !(e.volume >= 0.0 && e.volume.is_finite()) {
            out.push(Violation::NegativeVolume {
                src: e.src.clone(),
                dst: e.dst.clone(),
            });
        }
        if known && e.src != e.dst {
            adjacency
                .entry(e.src.as_str())
                .or_default()
                .push(e.dst.as_str());
            has_succ.insert(e.src.as_str());
            has_pred.insert(e.dst.as_str());
        }
    }

    if let Some(task) = find_cycle(graph, &adjacency) {
        out.push(Violation::Cycle { task });
    }
    if !graph
        .tasks
        .iter()
        .any(|t| !has_pred.contains(t.id.as_str()))
    {
        out.push(Violation::NoEntry);
    }
    if !graph
        .tasks
        .iter()
        .any(|t| !has_succ.contains(t.id.as_str()))
    {
        out.push(Violation::NoExit);
    }
    ValidationReport { violations: out }
}

/// Iterative three-colour DFS; returns a task on some cycle.
fn find_cycle(graph: &TaskGraph, adjacency: &HashMap<&str, Vec<&str>>) -> Option<String> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut mark: HashMap<&str, Mark> = HashMap::new();
    for root in &graph.tasks {
        if mark.contains_key(root.id.as_str()) {
            continue;
        }
        let mut stack: Vec<(&str, usize)> = vec![(root.id.as_str(), 0)];
        mark.insert(root.id.as_str(), Mark::Open);
        while let Some((node, next)) = stack.pop() {
            let succ = adjacency.get(node).map(Vec::as_slice).unwrap_or(&[]);
            if next < succ.len() {
                stack.push((node, next + 1));
                let s = succ[next];
                match mark.get(s) {
                    Some(Mark::Open) => return Some(s.to_string()),
                    Some(Mark::Done) => {}
                    None => {
                        mark.insert(s, Mark::Open);
                        stack.push((s, 0));
                    }
                }
            } else {
                mark.insert(node, Mark::Done);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Task};

    fn chain() -> TaskGraph {
        TaskGraph::new(
            10.0,
            vec![
                Task::new("a", 1.0),
                Task::new("b", 2.0),
                Task::new("c", 3.0),
            ],
            vec![Edge::new("a", "b", 1.0), Edge::new("b", "c", 1.0)],
        )
    }

    #[test]
    fn chain_is_clean() {
        assert!(validate(&chain()).is_ok());
    }

    #[test]
    fn self_edge_listed() {
        let mut g = chain();
        g.edges.push(Edge::new("a", "a", 1.0));
        let r = validate(&g);
        assert!(r
            .violations
            .contains(&Violation::SelfEdge { task: "a".into() }));
    }

    #[test]
    fn two_cycle_listed() {
        let g = TaskGraph::new(
            1.0,
            vec![
                Task::new("a", 1.0),
                Task::new("b", 1.0),
                Task::new("c", 1.0),
            ],
            vec![
                Edge::new("a", "b", 1.0),
                Edge::new("b", "a", 1.0),
                Edge::new("c", "a", 1.0),
            ],
        );
        let r = validate(&g);
        assert!(r
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Cycle { .. })));
    }

    #[test]
    fn empty_graph_has_no_entry() {
        let g = TaskGraph::new(1.0, vec![], vec![]);
        let r = validate(&g);
        assert!(r.violations.contains(&Violation::NoEntry));
        assert!(r.violations.contains(&Violation::NoExit));
    }

    #[test]
    fn everything_at_once() {
        let g = TaskGraph {
            period: 0.0,
            tasks: vec![Task::new("a", -1.0), Task::new("a", 1.0).imprecise(0.0)],
            edges: vec![Edge::new("a", "zz", -2.0), Edge::new("a", "zz", 1.0)],
        };
        let r = validate(&g);
        let kinds: Vec<String> = r.violations.iter().map(|v| format!("{v}")).collect();
        assert!(kinds.iter().any(|k| k.contains("period")));
        assert!(kinds.iter().any(|k| k.contains("duplicate task")));
        assert!(kinds
            .iter()
            .any(|k| k.contains("negative or non-finite weight")));
        assert!(kinds.iter().any(|k| k.contains("mandatory fraction")));
        assert!(kinds.iter().any(|k| k.contains("unknown task `zz`")));
        assert!(kinds.iter().any(|k| k.contains("duplicate edge")));
        assert!(kinds.iter().any(|k| k.contains("volume")));
    }
}
