//! Schedule quality metrics.
//!
//! ```
//! use hvlb_core::{fixtures, metrics, scheduler, Network, Variant};
//!
//! let graph = fixtures::stream_graph();
//! let net = Network::new(fixtures::example_topology()).unwrap();
//! let s = scheduler::schedule_once(&graph, &net, Variant::HvlbCcA, 0.5).unwrap();
//! let m = metrics::report(&s, &graph, &net).unwrap();
//! assert!(m.lb >= 1.0);
//! assert!(m.speedup <= 3.0);
//! ```

use serde::{Deserialize, Serialize};

use crate::graph::{derive_structure, TaskGraph};
use crate::network::Network;
use crate::scheduler::Schedule;
use crate::{Error, Result};

/// Entry-to-exit path with the largest sum of per-task minimum computation
/// times. Communication is ignored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPath {
    /// Task indices from entry to exit.
    pub tasks: Vec<usize>,
    pub length: f64,
}

fn min_comp(graph: &TaskGraph, network: &Network, task: usize) -> f64 {
    (0..network.processor_count())
        .map(|p| network.comp_time(graph.tasks[task].weight, p))
        .fold(f64::INFINITY, f64::min)
}

/// Ties between equally long paths go to the lexicographically smallest
/// sequence of task indices.
pub fn critical_path(graph: &TaskGraph, network: &Network) -> Result<CriticalPath> {
    let s = derive_structure(graph)?;
    let mut best: Vec<Option<(f64, Vec<usize>)>> = vec![None; graph.len()];
    for &n in s.topological_order().iter().rev() {
        let own = min_comp(graph, network, n);
        let mut pick: Option<&(f64, Vec<usize>)> = None;
        for nb in s.succs(n) {
            let cand = best[nb.task].as_ref().expect("successor done");
            if pick.is_none_or(|p| better(cand, p)) {
                pick = Some(cand);
            }
        }
        let (len, path) = match pick {
            Some((l, p)) => (
                own + l,
                std::iter::once(n).chain(p.iter().copied()).collect(),
            ),
            None => (own, vec![n]),
        };
        best[n] = Some((len, path));
    }
    let mut top: Option<&(f64, Vec<usize>)> = None;
    for e in s.entries() {
        let cand = best[e].as_ref().expect("entry done");
        if top.is_none_or(|t| better(cand, t)) {
            top = Some(cand);
        }
    }
    let (length, tasks) = top
        .cloned()
        .ok_or_else(|| Error::Metric("empty graph".into()))?;
    Ok(CriticalPath { tasks, length })
}

fn better(a: &(f64, Vec<usize>), b: &(f64, Vec<usize>)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Makespan divided by the critical-path length.
pub fn slr(schedule: &Schedule, graph: &TaskGraph, network: &Network) -> Result<f64> {
    let cp = critical_path(graph, network)?;
    if cp.length <= 0.0 {
        return Err(Error::Metric("critical path has zero length".into()));
    }
    Ok(schedule.makespan / cp.length)
}

/// Best sequential time on a single processor divided by the makespan.
pub fn speedup(schedule: &Schedule, graph: &TaskGraph, network: &Network) -> Result<f64> {
    if schedule.makespan <= 0.0 {
        return Err(Error::Metric("makespan is zero".into()));
    }
    let seq = (0..network.processor_count())
        .map(|p| {
            graph
                .tasks
                .iter()
                .map(|t| network.comp_time(t.weight, p))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    Ok(seq / schedule.makespan)
}

/// Mean busy time per processor, idle processors included.
pub fn average_busy(schedule: &Schedule, processors: usize) -> f64 {
    schedule
        .tasks
        .iter()
        .map(|t| t.finish - t.start)
        .sum::<f64>()
        / processors as f64
}

/// Makespan over mean busy time; 1 means perfect balance.
pub fn lb(schedule: &Schedule, processors: usize) -> Result<f64> {
    let avg = average_busy(schedule, processors);
    if avg <= 0.0 {
        return Err(Error::Metric("no busy time".into()));
    }
    Ok(schedule.makespan / avg)
}

/// Percentage of failed runs.
pub fn sfr(failed: &[bool]) -> Result<f64> {
    if failed.is_empty() {
        return Err(Error::Metric("empty batch".into()));
    }
    Ok(failed.iter().filter(|&&f| f).count() as f64 * 100.0 / failed.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub makespan: f64,
    pub slr: f64,
    pub speedup: f64,
    pub lb: f64,
    pub avg: f64,
    pub critical_path: Vec<String>,
}

pub fn report(schedule: &Schedule, graph: &TaskGraph, network: &Network) -> Result<MetricsReport> {
    let cp = critical_path(graph, network)?;
    let p = network.processor_count();
    Ok(MetricsReport {
        makespan: schedule.makespan,
        slr: slr(schedule, graph, network)?,
        speedup: speedup(schedule, graph, network)?,
        lb: lb(schedule, p)?,
        avg: average_busy(schedule, p),
        critical_path: cp
            .tasks
            .iter()
            .map(|&t| graph.tasks[t].id.clone())
            .collect(),
    })
}

pub const CSV_HEADER: &str = "graph,variant,alpha,makespan,slr,speedup,lb";

impl MetricsReport {
    pub fn csv_row(&self, graph: &str, variant: &str, alpha: f64) -> String {
        format!(
            "{graph},{variant},{alpha},{},{},{},{}",
            self.makespan, self.slr, self.speedup, self.lb
        )
    }
}
