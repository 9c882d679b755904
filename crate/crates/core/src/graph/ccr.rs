use super::TaskGraph;
use crate::network::Network;
use crate::{Error, Result};

/// Communication-to-computation ratio of `graph` on `network`: mean transfer
/// time over edges (per-source speeds, averaged over source processors)
/// divided by mean unrounded computation time over tasks and processors.
pub fn measure_ccr(graph: &TaskGraph, network: &Network) -> Result<f64> {
    let p = network.processor_count();
    if p < 2 {
        return Err(Error::Parameter("CCR needs at least two processors".into()));
    }
    if graph.edges.is_empty() || graph.tasks.is_empty() {
        return Err(Error::Parameter(
            "CCR needs at least one task and one edge".into(),
        ));
    }
    let comm: f64 = graph
        .edges
        .iter()
        .map(|e| (0..p).map(|s| network.comm_time(e.volume, s)).sum::<f64>() / p as f64)
        .sum::<f64>()
        / graph.edges.len() as f64;
    let comp: f64 = graph
        .tasks
        .iter()
        .map(|t| (0..p).map(|u| t.weight / network.rate(u)).sum::<f64>() / p as f64)
        .sum::<f64>()
        / graph.tasks.len() as f64;
    if comp <= 0.0 {
        return Err(Error::Parameter("all task weights are zero".into()));
    }
    Ok(comm / comp)
}

/// Scales every edge volume by one common factor so that the measured CCR
/// equals `ccr`. Task weights are untouched.
pub fn apply_ccr(graph: &TaskGraph, network: &Network, ccr: f64) -> Result<TaskGraph> {
    if !(ccr > 0.0 && ccr.is_finite()) {
        return Err(Error::Parameter(format!("ccr must be positive, got {ccr}")));
    }
    let current = measure_ccr(graph, network)?;
    if current <= 0.0 {
        return Err(Error::Parameter(
            "all edge volumes are zero; cannot scale".into(),
        ));
    }
    let factor = ccr / current;
    let mut out = graph.clone();
    if (factor - 1.0).abs() <= 1e-12 {
        return Ok(out);
    }
    for e in &mut out.edges {
        e.volume *= factor;
    }
    Ok(out)
}
