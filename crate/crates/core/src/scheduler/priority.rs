//! Task prioritization: per-processor upward ranks, their mean, and the
//! out-degree (and depth) weighted priority that orders the ready queue.

use serde::Serialize;

use super::Variant;
use crate::graph::{StructureIndex, TaskGraph};
use crate::network::Network;

/// Upward rank of every task on `processor`.
///
/// `rank(n, p) = comp(n, p) + max over successors s of (rank(s, p) + comm(n, s, p))`,
/// with communication priced at the processor's average transfer speed.
pub fn compute_rank(
    graph: &TaskGraph,
    structure: &StructureIndex,
    network: &Network,
    processor: usize,
) -> Vec<f64> {
    let mut rank = vec![0.0; graph.len()];
    for &n in structure.topological_order().iter().rev() {
        let comp = network.comp_time(graph.tasks[n].weight, processor);
        let tail = structure
            .succs(n)
            .iter()
            .map(|s| rank[s.task] + comm(network, s.volume, processor))
            .fold(0.0, f64::max);
        rank[n] = comp + tail;
    }
    rank
}

fn comm(network: &Network, volume: f64, processor: usize) -> f64 {
    if network.processor_count() < 2 {
        0.0
    } else {
        network.comm_time(volume, processor)
    }
}

/// Mean rank across processors; `ranks[t][p]`.
pub fn compute_hrank(ranks: &[Vec<f64>]) -> Vec<f64> {
    ranks
        .iter()
        .map(|row| row.iter().sum::<f64>() / row.len() as f64)
        .collect()
}

/// Everything the list scheduler needs to know about task priorities.
#[derive(Clone, Debug, Serialize)]
pub struct PriorityTable {
    /// `rank[t][p]`.
    pub rank: Vec<Vec<f64>>,
    pub hrank: Vec<f64>,
    pub depth: Vec<usize>,
    pub out_degree: Vec<usize>,
    pub hprv: Vec<f64>,
    /// Task indices by non-increasing priority, ties to the smaller index.
    pub order: Vec<usize>,
}

impl PriorityTable {
    /// First task in `order` that is dequeued before one of its predecessors,
    /// together with that predecessor.
    pub fn first_violation(&self, structure: &StructureIndex) -> Option<(usize, usize)> {
        let mut seen = vec![false; self.order.len()];
        for &t in &self.order {
            if let Some(p) = structure.preds(t).iter().find(|p| !seen[p.task]) {
                return Some((t, p.task));
            }
            seen[t] = true;
        }
        None
    }
}

pub fn compute_priority(
    graph: &TaskGraph,
    structure: &StructureIndex,
    network: &Network,
    variant: Variant,
) -> PriorityTable {
    let procs = network.processor_count();
    let per_proc: Vec<Vec<f64>> = (0..procs)
        .map(|p| compute_rank(graph, structure, network, p))
        .collect();
    let rank: Vec<Vec<f64>> = (0..graph.len())
        .map(|t| per_proc.iter().map(|r| r[t]).collect())
        .collect();
    let hrank = compute_hrank(&rank);
    let depth: Vec<usize> = (0..graph.len()).map(|t| structure.depth(t)).collect();
    let out_degree: Vec<usize> = (0..graph.len()).map(|t| structure.out_degree(t)).collect();
    let max_out = structure.max_out_degree().max(1) as f64;
    let hprv: Vec<f64> = (0..graph.len())
        .map(|t| {
            let base = hrank[t] * out_degree[t] as f64;
            let d = depth[t] as f64;
            match variant {
                Variant::HsvCc | Variant::HvlbCcA => base,
                Variant::HvlbCcB => base / max_out / (d * d),
                Variant::HvlbCcBLinearDepth => base / max_out / d,
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..graph.len()).collect();
    order.sort_by(|&a, &b| hprv[b].total_cmp(&hprv[a]).then(a.cmp(&b)));
    PriorityTable {
        rank,
        hrank,
        depth,
        out_degree,
        hprv,
        order,
    }
}
