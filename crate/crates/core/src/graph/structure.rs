use std::collections::HashMap;

use super::{validate, TaskGraph, Violation};
use crate::{Error, Result};

/// One end of an edge as seen from a task.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub task: usize,
    /// Index into [`TaskGraph::edges`].
    pub edge: usize,
    pub volume: f64,
}

/// Derived structure of a task graph, indexed by task position in
/// [`TaskGraph::tasks`].
#[derive(Clone, Debug)]
pub struct StructureIndex {
    preds: Vec<Vec<Neighbor>>,
    succs: Vec<Vec<Neighbor>>,
    depth: Vec<usize>,
    topo: Vec<usize>,
    max_out_degree: usize,
}

impl StructureIndex {
    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    pub fn preds(&self, task: usize) -> &[Neighbor] {
        &self.preds[task]
    }

    pub fn succs(&self, task: usize) -> &[Neighbor] {
        &self.succs[task]
    }

    pub fn in_degree(&self, task: usize) -> usize {
        self.preds[task].len()
    }

    pub fn out_degree(&self, task: usize) -> usize {
        self.succs[task].len()
    }

    /// 1 for entry tasks, otherwise 1 + the edge count of the longest path
    /// from any entry task.
    pub fn depth(&self, task: usize) -> usize {
        self.depth[task]
    }

    pub fn is_entry(&self, task: usize) -> bool {
        self.preds[task].is_empty()
    }

    pub fn is_exit(&self, task: usize) -> bool {
        self.succs[task].is_empty()
    }

    pub fn max_out_degree(&self) -> usize {
        self.max_out_degree
    }

    /// Topological order; among ready tasks the smallest index goes first.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn entries(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&t| self.is_entry(t))
    }

    pub fn exits(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&t| self.is_exit(t))
    }
}

/// Computes predecessor/successor sets, degrees, depths and a topological
/// order.
pub fn derive_structure(graph: &TaskGraph) -> Result<StructureIndex> {
    let n = graph.tasks.len();
    let index: HashMap<&str, usize> = graph
        .tasks
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id.as_str(), i))
        .collect();
    if index.len() != n {
        return Err(Error::InvalidGraph(validate(graph)));
    }

    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    for (e, edge) in graph.edges.iter().enumerate() {
        let (Some(&s), Some(&d)) = (index.get(edge.src.as_str()), index.get(edge.dst.as_str()))
        else {
            let report = validate(graph);
            debug_assert!(report
                .violations
                .iter()
                .any(|v| matches!(v, Violation::UnknownTask { .. })));
            return Err(Error::InvalidGraph(report));
        };
        if s == d {
            return Err(Error::Cycle(edge.src.clone()));
        }
        succs[s].push(Neighbor {
            task: d,
            edge: e,
            volume: edge.volume,
        });
        preds[d].push(Neighbor {
            task: s,
            edge: e,
            volume: edge.volume,
        });
    }
    for list in preds.iter_mut().chain(succs.iter_mut()) {
        list.sort_by_key(|nb| nb.task);
    }

    // Kahn with a min-heap for a deterministic order.
    let mut remaining: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&t| remaining[t] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut topo = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(t)) = ready.pop() {
        topo.push(t);
        for nb in &succs[t] {
            remaining[nb.task] -= 1;
            if remaining[nb.task] == 0 {
                ready.push(std::cmp::Reverse(nb.task));
            }
        }
    }
    if topo.len() != n {
        let member = cycle_member(&preds, &remaining);
        return Err(Error::Cycle(graph.tasks[member].id.clone()));
    }

    let mut depth = vec![1usize; n];
    for &t in &topo {
        for nb in &succs[t] {
            depth[nb.task] = depth[nb.task].max(depth[t] + 1);
        }
    }
    let max_out_degree = succs.iter().map(Vec::len).max().unwrap_or(0);

    Ok(StructureIndex {
        preds,
        succs,
        depth,
        topo,
        max_out_degree,
    })
}

/// Walks predecessor links among unprocessed tasks until one repeats; that
/// task lies on a cycle.
fn cycle_member(preds: &[Vec<Neighbor>], remaining: &[usize]) -> usize {
    let mut seen = vec![false; preds.len()];
    let mut cur = (0..preds.len())
        .find(|&t| remaining[t] > 0)
        .expect("a blocked task");
    loop {
        if seen[cur] {
            return cur;
        }
        seen[cur] = true;
        cur = preds[cur]
            .iter()
            .map(|nb| nb.task)
            .find(|&p| remaining[p] > 0)
            .expect("blocked task has a blocked predecessor");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::graph::{Edge, Task};

    #[test]
    fn stream_graph_pred_and_depth() {
        let g = fixtures::stream_graph();
        let s = derive_structure(&g).unwrap();
        let n5 = g.task_index("n5").unwrap();
        let pred: Vec<&str> = s
            .preds(n5)
            .iter()
            .map(|nb| g.tasks[nb.task].id.as_str())
            .collect();
        assert_eq!(pred, ["n1", "n2", "n3"]);
        assert_eq!(s.in_degree(n5), 3);
        let succ: Vec<&str> = s
            .succs(n5)
            .iter()
            .map(|nb| g.tasks[nb.task].id.as_str())
            .collect();
        assert_eq!(succ, ["n7", "n8"]);
        assert_eq!(s.depth(g.task_index("n9").unwrap()), 4);

        // outd and depth rows of the rank table
        let outd: Vec<usize> = (0..10).map(|t| s.out_degree(t)).collect();
        assert_eq!(outd, [2, 2, 2, 2, 2, 1, 1, 1, 0, 0]);
        let depth: Vec<usize> = (0..10).map(|t| s.depth(t)).collect();
        assert_eq!(depth, [1, 1, 1, 2, 2, 2, 3, 3, 4, 4]);
        assert_eq!(s.max_out_degree(), 2);
    }

    #[test]
    fn isolated_task() {
        let g = TaskGraph::new(1.0, vec![Task::new("a", 1.0)], vec![]);
        let s = derive_structure(&g).unwrap();
        assert_eq!((s.in_degree(0), s.out_degree(0), s.depth(0)), (0, 0, 1));
        assert!(s.is_entry(0) && s.is_exit(0));
    }

    #[test]
    fn cycle_names_member() {
        let g = TaskGraph::new(
            1.0,
            vec![
                Task::new("a", 1.0),
                Task::new("b", 1.0),
                Task::new("c", 1.0),
            ],
            vec![
                Edge::new("a", "b", 1.0),
                Edge::new("b", "c", 1.0),
                Edge::new("c", "b", 1.0),
            ],
        );
        match derive_structure(&g) {
            Err(Error::Cycle(id)) => assert!(id == "b" || id == "c"),
            other => panic!("expected cycle, got {other:?}"),
        }
    }
}
